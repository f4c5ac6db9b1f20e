#pragma once

#include <cstdint>
#include <map>
#include <string>

namespace popsynth {

inline constexpr const char *kToolVersion = "0.1.0";

// Provenance record written once per output directory: the command, its
// resolved configuration and content digests of every input and output.
struct RunManifest {
    std::string command;
    std::string config_json = "{}";
    std::uint64_t seed = 0;
    std::map<std::string, std::string> inputs;  // path -> digest
    std::map<std::string, std::string> outputs; // path -> digest
    std::string started_at;
    std::string finished_at;

    void add_input(const std::string &path);
    void add_output(const std::string &path);
    void write(const std::string &path) const;
    static RunManifest read(const std::string &path);
};

std::string file_digest(const std::string &path);
std::string iso8601_now();

} // namespace popsynth
