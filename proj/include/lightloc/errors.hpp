#pragma once

#include <stdexcept>
#include <string>

namespace lightloc {

// Error taxonomy shared by the library and the CLI. The CLI maps these onto
// process exit codes: ConfigError -> 2, MissingArtifactError -> 3, anything
// else derived from Error -> 4.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid user-supplied configuration or arguments.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Malformed input document (topology, dataset, thresholds, model).
class ParseError : public Error {
public:
    using Error::Error;
};

// A required upstream artifact file does not exist.
class MissingArtifactError : public Error {
public:
    using Error::Error;
};

// Topology violates the line-WSS or local-WSS port budget.
class PortCapacityExceeded : public Error {
public:
    PortCapacityExceeded(const std::string& node, long required, long available)
        : Error("port capacity exceeded at node " + node + ": required " +
                std::to_string(required) + ", available " + std::to_string(available)),
          node(node), required(required), available(available) {}
    std::string node;
    long required;
    long available;
};

// A failure type was applied to a component kind it cannot affect.
class KindMismatch : public Error {
public:
    using Error::Error;
};

// Fewer traversed components than requested simultaneous failures.
class NotEnoughComponents : public Error {
public:
    using Error::Error;
};

// A threshold window holds only one class; the caller falls back to
// nominal-derived thresholds.
class InsufficientHistory : public Error {
public:
    InsufficientHistory(int lightpath, int position)
        : Error("insufficient labeled history for lightpath " + std::to_string(lightpath) +
                " position " + std::to_string(position)),
          lightpath(lightpath), position(position) {}
    int lightpath;
    int position;
};

// Feature/model dimension disagreement.
class DimensionMismatch : public Error {
public:
    using Error::Error;
};

// Training produced a non-finite loss.
class NonFiniteLoss : public Error {
public:
    using Error::Error;
};

// Paired lists passed to scoring have different lengths.
class LengthMismatch : public Error {
public:
    using Error::Error;
};

// Feature extraction asked for a component no lightpath traverses.
class Untraversed : public Error {
public:
    explicit Untraversed(int component)
        : Error("component " + std::to_string(component) + " is not traversed by any lightpath"),
          component(component) {}
    int component;
};

}  // namespace lightloc
