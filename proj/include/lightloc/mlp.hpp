#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "lightloc/io.hpp"
#include "lightloc/monitoring.hpp"
#include "lightloc/rng.hpp"

namespace lightloc {

// Per traversing lightpath: hop distance to and readings (before and after the
// failure event) at the nearest monitored slot on each side of the component,
// concatenated over lightpaths and zero-padded to 6 * l_max entries. The left
// side is zero-filled when nothing precedes the component; on the right the
// reception flag acts as an always-present terminal monitor, so a dead
// receiver stays observable even where no downstream OPM exists.
constexpr int kFeaturesPerLightpath = 6;

inline int max_traversal_count(const ComponentGraph& g, const std::vector<Lightpath>& lps) {
    std::vector<int> count(g.components.size(), 0);
    int best = 0;
    for (const auto& lp : lps) {
        for (int c : lp.components) best = std::max(best, ++count[c]);
    }
    return best;
}

inline std::vector<double> extract_features(int component, const std::vector<Lightpath>& lps,
                                            const Deployment& dep, const MonitorSnapshot& pre,
                                            const MonitorSnapshot& post, int l_max) {
    std::vector<double> out(static_cast<std::size_t>(kFeaturesPerLightpath) * l_max, 0.0);
    int filled = 0;
    bool traversed = false;
    for (std::size_t li = 0; li < lps.size(); ++li) {
        const Lightpath& lp = lps[li];
        auto it = std::find(lp.components.begin(), lp.components.end(), component);
        if (it == lp.components.end()) continue;
        traversed = true;
        if (filled >= l_max) break;
        int c = static_cast<int>(it - lp.components.begin());
        double* f = out.data() + static_cast<std::size_t>(kFeaturesPerLightpath) * filled;
        for (int j = c - 1; j >= 0; --j) {
            if (dep.monitors(lp.slots[j])) {
                f[0] = c - j;
                f[1] = pre.readings[li][j];
                f[2] = post.readings[li][j];
                break;
            }
        }
        int n_slots = static_cast<int>(lp.slots.size());
        bool right_found = false;
        for (int j = c; j < n_slots; ++j) {
            if (dep.monitors(lp.slots[j])) {
                f[3] = j - c + 1;
                f[4] = pre.readings[li][j];
                f[5] = post.readings[li][j];
                right_found = true;
                break;
            }
        }
        if (!right_found) {
            f[3] = n_slots - c + 1;
            f[4] = pre.readings[li].back();
            f[5] = post.readings[li].back();
        }
        ++filled;
    }
    if (!traversed) throw Untraversed(component);
    return out;
}

struct MlpConfig {
    int hidden = 64;
    double learning_rate = 1e-4;
    int epochs = 100;
    int batch_size = 32;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_epsilon = 1e-8;
    double logit_clamp = 30.0;
};

struct TrainReport {
    std::vector<double> epoch_loss;
    double final_loss = 0.0;
    std::uint64_t seed = 0;
};

template <typename Scalar>
struct Mlp {
    using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    Mat w1;  // hidden x in
    Vec b1;  // hidden
    Mat w2;  // 1 x hidden
    Scalar b2 = 0;
    int l_max = 0;
    MlpConfig config;

    int input_dim() const { return static_cast<int>(w1.cols()); }
    int hidden_dim() const { return static_cast<int>(w1.rows()); }

    static Mlp zeros(int in, int hidden, int l_max = 0) {
        Mlp m;
        m.w1 = Mat::Zero(hidden, in);
        m.b1 = Vec::Zero(hidden);
        m.w2 = Mat::Zero(1, hidden);
        m.b2 = 0;
        m.l_max = l_max;
        m.config.hidden = hidden;
        return m;
    }

    static Mlp initialized(int in, int hidden, std::uint64_t seed, int l_max = 0) {
        Mlp m = zeros(in, hidden, l_max);
        Rng rng(derive_seed(seed, "init"));
        double a1 = 1.0 / std::sqrt(static_cast<double>(in));
        for (int r = 0; r < hidden; ++r) {
            for (int c = 0; c < in; ++c) m.w1(r, c) = static_cast<Scalar>(rng.uniform(-a1, a1));
        }
        double a2 = 1.0 / std::sqrt(static_cast<double>(hidden));
        for (int c = 0; c < hidden; ++c) m.w2(0, c) = static_cast<Scalar>(rng.uniform(-a2, a2));
        return m;
    }

    Vec hidden_activations(const Vec& x) const {
        Vec z = w1 * x + b1;
        return z.unaryExpr([](Scalar v) { return Scalar(1) / (Scalar(1) + std::exp(-v)); });
    }

    Scalar logit(const Vec& x) const {
        if (x.size() != w1.cols()) {
            throw DimensionMismatch("feature length " + std::to_string(x.size()) +
                                    " does not match model input " + std::to_string(w1.cols()));
        }
        return (w2 * hidden_activations(x))(0, 0) + b2;
    }

    Scalar probability(const Vec& x) const {
        Scalar z = logit(x);
        return Scalar(1) / (Scalar(1) + std::exp(-z));
    }

    bool predicts_faulty(const Vec& x) const { return probability(x) >= Scalar(0.5); }
};

template <typename Scalar>
typename Mlp<Scalar>::Vec to_vec(const std::vector<double>& v) {
    typename Mlp<Scalar>::Vec x(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) x[static_cast<int>(i)] = static_cast<Scalar>(v[i]);
    return x;
}

// Binary cross-entropy on the clamped logit; the stable form never evaluates
// log of a rounded-to-zero probability.
template <typename Scalar>
double bce_loss(Scalar logit, double label, double clamp = 30.0) {
    double z = std::clamp(static_cast<double>(logit), -clamp, clamp);
    return std::log1p(std::exp(-std::abs(z))) + std::max(z, 0.0) - z * label;
}

template <typename Scalar>
struct Gradients {
    typename Mlp<Scalar>::Mat w1, w2;
    typename Mlp<Scalar>::Vec b1;
    Scalar b2 = 0;
};

// Accumulates dLoss/dparams for one example into grads; returns the loss.
template <typename Scalar>
double backward(const Mlp<Scalar>& m, const typename Mlp<Scalar>::Vec& x, double label,
                Gradients<Scalar>& grads) {
    using Vec = typename Mlp<Scalar>::Vec;
    Vec h = m.hidden_activations(x);
    Scalar z = (m.w2 * h)(0, 0) + m.b2;
    double loss = bce_loss(z, label, m.config.logit_clamp);
    Scalar p = Scalar(1) / (Scalar(1) + std::exp(-z));
    Scalar dz = p - static_cast<Scalar>(label);
    grads.w2.noalias() += dz * h.transpose();
    grads.b2 += dz;
    Vec dh = m.w2.transpose() * dz;
    Vec ds = dh.array() * h.array() * (Scalar(1) - h.array());
    grads.w1.noalias() += ds * x.transpose();
    grads.b1 += ds;
    return loss;
}

template <typename Scalar>
struct TrainingPair {
    typename Mlp<Scalar>::Vec features;
    double label = 0.0;
};

template <typename Scalar>
class AdamState {
public:
    explicit AdamState(const Mlp<Scalar>& m)
        : mw1_(Mat::Zero(m.w1.rows(), m.w1.cols())), vw1_(mw1_),
          mw2_(Mat::Zero(m.w2.rows(), m.w2.cols())), vw2_(mw2_),
          mb1_(Vec::Zero(m.b1.size())), vb1_(mb1_), mb2_(0), vb2_(0) {}

    void step(Mlp<Scalar>& m, const Gradients<Scalar>& g) {
        ++t_;
        const auto& c = m.config;
        double corr1 = 1.0 - std::pow(c.beta1, t_);
        double corr2 = 1.0 - std::pow(c.beta2, t_);
        Scalar lr = static_cast<Scalar>(c.learning_rate * std::sqrt(corr2) / corr1);
        Scalar beta1 = static_cast<Scalar>(c.beta1), beta2 = static_cast<Scalar>(c.beta2);
        Scalar eps = static_cast<Scalar>(c.adam_epsilon);
        auto update = [&](auto& param, auto& mom, auto& vel, const auto& grad) {
            mom.array() = beta1 * mom.array() + (Scalar(1) - beta1) * grad.array();
            vel.array() = beta2 * vel.array() + (Scalar(1) - beta2) * grad.array().square();
            param.array() -= lr * mom.array() / (vel.array().sqrt() + eps);
        };
        update(m.w1, mw1_, vw1_, g.w1);
        update(m.w2, mw2_, vw2_, g.w2);
        update(m.b1, mb1_, vb1_, g.b1);
        mb2_ = beta1 * mb2_ + (Scalar(1) - beta1) * g.b2;
        vb2_ = beta2 * vb2_ + (Scalar(1) - beta2) * g.b2 * g.b2;
        m.b2 -= lr * mb2_ / (static_cast<Scalar>(std::sqrt(static_cast<double>(vb2_))) + eps);
    }

private:
    using Mat = typename Mlp<Scalar>::Mat;
    using Vec = typename Mlp<Scalar>::Vec;
    Mat mw1_, vw1_, mw2_, vw2_;
    Vec mb1_, vb1_;
    Scalar mb2_, vb2_;
    long t_ = 0;
};

template <typename Scalar>
TrainReport train(Mlp<Scalar>& m, const std::vector<TrainingPair<Scalar>>& pairs,
                  std::uint64_t seed) {
    if (pairs.empty()) throw ConfigError("training requires at least one pair");
    for (const auto& p : pairs) {
        if (p.features.size() != m.w1.cols()) {
            throw DimensionMismatch("training pair dimension " + std::to_string(p.features.size()) +
                                    " does not match model input " + std::to_string(m.w1.cols()));
        }
    }
    TrainReport report;
    report.seed = seed;
    AdamState<Scalar> adam(m);
    std::vector<int> order(pairs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    Gradients<Scalar> grads;
    for (int epoch = 0; epoch < m.config.epochs; ++epoch) {
        Rng rng(derive_seed(seed, "shuffle", epoch));
        rng.shuffle(order);
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < order.size(); start += m.config.batch_size) {
            std::size_t end = std::min(order.size(), start + m.config.batch_size);
            grads.w1.setZero(m.w1.rows(), m.w1.cols());
            grads.w2.setZero(m.w2.rows(), m.w2.cols());
            grads.b1.setZero(m.b1.size());
            grads.b2 = 0;
            double batch_loss = 0.0;
            for (std::size_t k = start; k < end; ++k) {
                batch_loss += backward(m, pairs[order[k]].features, pairs[order[k]].label, grads);
            }
            double scale = 1.0 / static_cast<double>(end - start);
            if (!std::isfinite(batch_loss)) {
                throw NonFiniteLoss("non-finite loss in epoch " + std::to_string(epoch));
            }
            grads.w1 *= static_cast<Scalar>(scale);
            grads.w2 *= static_cast<Scalar>(scale);
            grads.b1 *= static_cast<Scalar>(scale);
            grads.b2 *= static_cast<Scalar>(scale);
            adam.step(m, grads);
            epoch_loss += batch_loss;
        }
        report.epoch_loss.push_back(epoch_loss / static_cast<double>(pairs.size()));
    }
    report.final_loss = report.epoch_loss.empty() ? 0.0 : report.epoch_loss.back();
    return report;
}

inline std::string format_weight(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

template <typename Scalar>
Json matrix_to_json(const typename Mlp<Scalar>::Mat& m) {
    Json rows = Json::array();
    for (int r = 0; r < m.rows(); ++r) {
        std::string row;
        for (int c = 0; c < m.cols(); ++c) {
            if (c) row += ' ';
            row += format_weight(static_cast<double>(m(r, c)));
        }
        rows.push_back(row);
    }
    return rows;
}

template <typename Scalar>
typename Mlp<Scalar>::Mat matrix_from_json(const Json& j, int rows, int cols) {
    typename Mlp<Scalar>::Mat m(rows, cols);
    if (static_cast<int>(j.size()) != rows) throw ParseError("weight matrix row count mismatch");
    for (int r = 0; r < rows; ++r) {
        auto vals = split_readings(j[r].get<std::string>());
        if (static_cast<int>(vals.size()) != cols) {
            throw ParseError("weight matrix column count mismatch");
        }
        for (int c = 0; c < cols; ++c) m(r, c) = static_cast<Scalar>(vals[c]);
    }
    return m;
}

template <typename Scalar>
Json model_to_json(const Mlp<Scalar>& m, const std::string& mode, std::uint64_t seed) {
    Json j;
    j["format"] = "lightloc-model";
    j["version"] = 1;
    j["mode"] = mode;
    j["seed"] = seed;
    j["input_dim"] = m.input_dim();
    j["hidden_dim"] = m.hidden_dim();
    j["l_max"] = m.l_max;
    Json cfg;
    cfg["learning_rate"] = m.config.learning_rate;
    cfg["epochs"] = m.config.epochs;
    cfg["batch_size"] = m.config.batch_size;
    cfg["beta1"] = m.config.beta1;
    cfg["beta2"] = m.config.beta2;
    cfg["adam_epsilon"] = m.config.adam_epsilon;
    cfg["logit_clamp"] = m.config.logit_clamp;
    j["hyperparams"] = cfg;
    j["w1"] = matrix_to_json<Scalar>(m.w1);
    j["b1"] = matrix_to_json<Scalar>(m.b1);
    j["w2"] = matrix_to_json<Scalar>(m.w2);
    j["b2"] = format_weight(static_cast<double>(m.b2));
    return j;
}

template <typename Scalar>
Mlp<Scalar> model_from_json(const Json& j, std::string* mode = nullptr) {
    if (!j.contains("format") || j["format"] != "lightloc-model") {
        throw ParseError("not a model file");
    }
    int in = require_field(j, "input_dim").get<int>();
    int hidden = require_field(j, "hidden_dim").get<int>();
    Mlp<Scalar> m = Mlp<Scalar>::zeros(in, hidden, require_field(j, "l_max").get<int>());
    const Json& cfg = require_field(j, "hyperparams");
    m.config.learning_rate = cfg["learning_rate"].get<double>();
    m.config.epochs = cfg["epochs"].get<int>();
    m.config.batch_size = cfg["batch_size"].get<int>();
    m.config.beta1 = cfg["beta1"].get<double>();
    m.config.beta2 = cfg["beta2"].get<double>();
    m.config.adam_epsilon = cfg["adam_epsilon"].get<double>();
    m.config.logit_clamp = cfg["logit_clamp"].get<double>();
    m.w1 = matrix_from_json<Scalar>(require_field(j, "w1"), hidden, in);
    m.b1 = matrix_from_json<Scalar>(require_field(j, "b1"), hidden, 1);
    m.w2 = matrix_from_json<Scalar>(require_field(j, "w2"), 1, hidden);
    m.b2 = static_cast<Scalar>(parse_db(require_field(j, "b2").get<std::string>()));
    if (mode) *mode = require_field(j, "mode").get<std::string>();
    return m;
}

template <typename Scalar>
void write_model(const Mlp<Scalar>& m, const std::string& mode, std::uint64_t seed,
                 const std::string& path) {
    atomic_write_file(path, model_to_json(m, mode, seed).dump(1) + "\n");
}

}  // namespace lightloc
