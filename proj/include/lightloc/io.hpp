#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "lightloc/errors.hpp"

namespace lightloc {

// ordered_json keeps insertion order on dump, which makes every artifact file
// byte-stable under a fixed seed.
using Json = nlohmann::ordered_json;

// dBm values are serialized as fixed-precision decimal text so files do not
// depend on floating-point formatting quirks.
inline std::string format_db(double v, int decimals = 4) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
    return buf;
}

inline double parse_db(const std::string& s) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw ParseError("trailing characters in number: " + s);
        return v;
    } catch (const std::invalid_argument&) {
        throw ParseError("not a number: " + s);
    }
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingArtifactError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Write-then-rename so a crashed run never leaves a truncated artifact.
inline void atomic_write_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        out << content;
        if (!out.flush()) throw Error("short write to " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

inline Json parse_json_file(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) {
        throw MissingArtifactError("missing file: " + path.string());
    }
    try {
        return Json::parse(read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

inline const Json& require_field(const Json& j, const std::string& key,
                                 const std::string& where = "document") {
    auto it = j.find(key);
    if (it == j.end()) throw ParseError(where + ": missing field '" + key + "'");
    return *it;
}

}  // namespace lightloc
