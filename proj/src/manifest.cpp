#include "popsynth/manifest.hpp"

#include "popsynth/errors.hpp"
#include "popsynth/rng.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace popsynth {

std::string file_digest(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("digest: cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string bytes = buf.str();
    char out[32];
    std::snprintf(out, sizeof(out), "fnv1a64:%016llx",
                  static_cast<unsigned long long>(fnv1a64(bytes)));
    return out;
}

std::string iso8601_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void RunManifest::add_input(const std::string &path) { inputs[path] = file_digest(path); }

void RunManifest::add_output(const std::string &path) { outputs[path] = file_digest(path); }

void RunManifest::write(const std::string &path) const {
    nlohmann::json doc;
    doc["tool_version"] = kToolVersion;
    doc["command"] = command;
    doc["seed"] = seed;
    doc["config"] = nlohmann::json::parse(config_json);
    doc["inputs"] = inputs;
    doc["outputs"] = outputs;
    doc["started_at"] = started_at;
    doc["finished_at"] = finished_at;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("manifest: cannot write '" + path + "'");
    out << doc.dump(2) << '\n';
}

RunManifest RunManifest::read(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("manifest: cannot open '" + path + "'");
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception &e) {
        throw DataError(std::string("manifest: invalid JSON: ") + e.what());
    }
    RunManifest m;
    m.command = doc.value("command", "");
    m.seed = doc.value("seed", 0ULL);
    m.config_json = doc.contains("config") ? doc["config"].dump() : "{}";
    if (doc.contains("inputs"))
        for (const auto &[k, v] : doc["inputs"].items()) m.inputs[k] = v.get<std::string>();
    if (doc.contains("outputs"))
        for (const auto &[k, v] : doc["outputs"].items()) m.outputs[k] = v.get<std::string>();
    m.started_at = doc.value("started_at", "");
    m.finished_at = doc.value("finished_at", "");
    return m;
}

} // namespace popsynth
