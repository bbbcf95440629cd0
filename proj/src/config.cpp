#include "aquastream/engine/config.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_set>

namespace aquastream {

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> parse_string_list(const std::string& raw) {
    // ["a", "b"], quotes optional for bare tokens.
    std::string s = trim(raw);
    if (s.size() < 2 || s.front() != '[' || s.back() != ']') {
        throw ConfigError("expected a [\"...\"] list, got: " + raw);
    }
    std::vector<std::string> out;
    std::string item;
    bool in_quotes = false;
    for (std::size_t i = 1; i + 1 < s.size(); ++i) {
        char c = s[i];
        if (c == '"') {
            in_quotes = !in_quotes;
        } else if (c == ',' && !in_quotes) {
            if (auto t = trim(item); !t.empty()) out.push_back(t);
            item.clear();
        } else {
            item.push_back(c);
        }
    }
    if (in_quotes) throw ConfigError("unterminated string in list: " + raw);
    if (auto t = trim(item); !t.empty()) out.push_back(t);
    return out;
}

std::int64_t parse_int(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        std::int64_t v = std::stoll(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("invalid integer for " + key + ": " + value);
    }
}

}  // namespace

MissingPolicy missing_policy_from_string(const std::string& s) {
    if (s == "dead_letter") return MissingPolicy::DeadLetter;
    if (s == "emit_flagged") return MissingPolicy::EmitFlagged;
    throw ConfigError("unknown missing policy: " + s + " (want dead_letter or emit_flagged)");
}

const char* to_string(MissingPolicy p) {
    return p == MissingPolicy::DeadLetter ? "dead_letter" : "emit_flagged";
}

void EngineConfig::validate() const {
    if (enrichment_attributes.empty()) throw ConfigError("engine.attributes must be non-empty");
    std::unordered_set<std::string> seen;
    for (const auto& a : enrichment_attributes) {
        if (a.empty()) throw ConfigError("empty attribute name");
        if (!seen.insert(a).second) throw ConfigError("duplicate attribute name: " + a);
    }
    if (partitions == 0) throw ConfigError("engine.partitions must be >= 1");
    if (checkpoint_interval_ms <= 0) throw ConfigError("engine.checkpoint_interval_ms must be > 0");
    if (checkpoint_dir.empty()) throw ConfigError("engine.checkpoint_dir is required");
}

void PlatformConfig::apply(const std::string& key, const std::string& value) {
    if (key == "engine.partitions") {
        engine.partitions = static_cast<std::uint32_t>(parse_int(key, value));
    } else if (key == "engine.attributes") {
        engine.enrichment_attributes = parse_string_list(value);
    } else if (key == "engine.checkpoint_interval_ms") {
        engine.checkpoint_interval_ms = parse_int(key, value);
    } else if (key == "engine.missing_policy") {
        engine.missing_policy = missing_policy_from_string(value);
    } else if (key == "engine.topic.measurements") {
        engine.topics.measurements = value;
    } else if (key == "engine.topic.updates") {
        engine.topics.updates = value;
    } else if (key == "engine.topic.results") {
        engine.topics.results = value;
    } else if (key == "engine.topic.dead_letter") {
        engine.topics.dead_letter = value;
    } else if (key == "engine.checkpoint_dir") {
        engine.checkpoint_dir = value;
    } else if (key == "store.journal_path") {
        store.journal_path = value;
    } else if (key == "store.simulated_latency_ms") {
        store.simulated_latency_ms = parse_int(key, value);
    } else if (key == "log.root") {
        log_root = value;
    } else {
        throw ConfigError("unknown config key: " + key);
    }
}

PlatformConfig PlatformConfig::load(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in.is_open()) throw ConfigError("cannot open config file: " + file.string());
    PlatformConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        // Strip comments, but not inside quotes.
        bool in_quotes = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            if (line[i] == '"') in_quotes = !in_quotes;
            if (line[i] == '#' && !in_quotes) {
                line.resize(i);
                break;
            }
        }
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(file.string() + ":" + std::to_string(lineno) + ": expected key = value");
        }
        cfg.apply(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return cfg;
}

}  // namespace aquastream
