#pragma once

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "../core/types.hpp"

// Persistent memo for profile evaluations: one JSON object per line, doubles
// stored as hexfloat strings so values survive the round-trip bit-for-bit
// (a warm re-run must reproduce the cold run's output byte for byte). Keys
// carry a scenario fingerprint, so one cache file can serve many scenarios
// and a stale file can never leak values into the wrong sweep.

namespace mobeq {

inline std::string hex_double(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%a", v);
    return buf;
}

inline double unhex_double(const std::string& s) {
    if (s.empty()) throw std::invalid_argument("empty hexfloat");
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size())
        throw std::invalid_argument("bad hexfloat '" + s + "'");
    return v;
}

// Incremental FNV-1a over a caller-chosen serialization; used to fingerprint
// scenario content so cache keys are self-describing.
class Fingerprint {
  public:
    Fingerprint& add(std::string_view s) {
        for (unsigned char c : s) {
            hash_ ^= c;
            hash_ *= 1099511628211ull;
        }
        return add_byte('|');
    }
    Fingerprint& add(double v) { return add(hex_double(v)); }
    Fingerprint& add(long long v) { return add(std::to_string(v)); }

    std::string hex() const {
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash_));
        return buf;
    }

  private:
    Fingerprint& add_byte(unsigned char c) {
        hash_ ^= c;
        hash_ *= 1099511628211ull;
        return *this;
    }

    std::uint64_t hash_ = 1469598103934665603ull;
};

// One memoized profile outcome; either a successful evaluation or the error
// text of a failed one (failures are remembered so a restarted sweep does not
// grind through them again).
struct CachedEvaluation {
    bool failed = false;
    std::string error;
    std::vector<double> payoffs;
    MetricsTriple metrics;
    double amod_share = 0.0;
};

class EvalCache {
  public:
    EvalCache() = default;

    // Loads entries matching the fingerprint and opens the file for appends.
    // Malformed lines (e.g. a torn final line from a killed run) are skipped.
    void open(const std::string& path, const std::string& fingerprint) {
        fingerprint_ = fingerprint;
        entries_.clear();
        std::ifstream in(path);
        std::string line;
        while (in && std::getline(in, line)) {
            if (line.empty()) continue;
            nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
            if (j.is_discarded() || !j.is_object() || !j.contains("k") || !j["k"].is_string())
                continue;
            const std::string key = j["k"].get<std::string>();
            if (key.size() <= fingerprint_.size() + 1 ||
                key.compare(0, fingerprint_.size(), fingerprint_) != 0 ||
                key[fingerprint_.size()] != ':')
                continue;
            try {
                CachedEvaluation ev;
                if (j.contains("e")) {
                    ev.failed = true;
                    ev.error = j["e"].get<std::string>();
                } else {
                    for (const auto& p : j.at("p")) ev.payoffs.push_back(unhex_double(p));
                    const auto& m = j.at("m");
                    if (m.size() != 3) continue;
                    ev.metrics.customer_cost = unhex_double(m[0]);
                    ev.metrics.emission_cost = unhex_double(m[1]);
                    ev.metrics.public_revenue = unhex_double(m[2]);
                    ev.amod_share = unhex_double(j.at("s").get<std::string>());
                }
                entries_[key.substr(fingerprint_.size() + 1)] = std::move(ev);
            } catch (const std::exception&) {
                continue;
            }
        }
        in.close();
        out_.open(path, std::ios::app);
        if (!out_) throw std::runtime_error("cannot open cache file '" + path + "' for writing");
        enabled_ = true;
    }

    bool enabled() const { return enabled_; }
    std::size_t loaded() const { return entries_.size(); }

    std::optional<CachedEvaluation> lookup(const std::string& profile_key) const {
        if (!enabled_) return std::nullopt;
        std::shared_lock lock(mutex_);
        auto it = entries_.find(profile_key);
        if (it == entries_.end()) return std::nullopt;
        return it->second;
    }

    void store(const std::string& profile_key, const CachedEvaluation& ev) {
        if (!enabled_) return;
        std::unique_lock lock(mutex_);
        if (!entries_.emplace(profile_key, ev).second) return; // already recorded
        nlohmann::json j;
        j["k"] = fingerprint_ + ":" + profile_key;
        if (ev.failed) {
            j["e"] = ev.error;
        } else {
            nlohmann::json p = nlohmann::json::array();
            for (double v : ev.payoffs) p.push_back(hex_double(v));
            j["p"] = std::move(p);
            j["m"] = {hex_double(ev.metrics.customer_cost), hex_double(ev.metrics.emission_cost),
                      hex_double(ev.metrics.public_revenue)};
            j["s"] = hex_double(ev.amod_share);
        }
        out_ << j.dump() << '\n';
        out_.flush();
    }

  private:
    mutable std::shared_mutex mutex_;
    std::unordered_map<std::string, CachedEvaluation> entries_;
    std::ofstream out_;
    std::string fingerprint_;
    bool enabled_ = false;
};

} // namespace mobeq
