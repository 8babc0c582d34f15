#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "tokscan/metrics.hpp"
#include "tokscan/vocab.hpp"
#include "tokscan/wire.hpp"

namespace tokscan {

using ordered_json = nlohmann::ordered_json;

struct CheckpointError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class ProbeStatus { Ok, NoResult, PermError };

inline std::string to_string(ProbeStatus s) {
    switch (s) {
        case ProbeStatus::Ok: return "ok";
        case ProbeStatus::NoResult: return "no_result";
        case ProbeStatus::PermError: return "perm_error";
    }
    return "ok";
}

inline ProbeStatus probe_status_from_string(const std::string& s) {
    if (s == "ok") return ProbeStatus::Ok;
    if (s == "no_result") return ProbeStatus::NoResult;
    if (s == "perm_error") return ProbeStatus::PermError;
    throw CheckpointError("checkpoint: unknown status " + s);
}

/// One completed probe. Metrics are present only for ok records.
struct ScanRecord {
    TokenId id = 0;
    ProbeStatus status = ProbeStatus::Ok;
    std::optional<ConfidenceMetrics> metrics;
    int error_code = 0;
    wire::Usage usage;

    ordered_json to_json() const {
        ordered_json j;
        j["id"] = id;
        j["status"] = to_string(status);
        if (metrics) {
            j["metrics"] = {{"entropy", metrics->entropy},
                            {"tail", metrics->tail_prob},
                            {"margin", metrics->margin},
                            {"top_prob", metrics->top_prob}};
        }
        if (status == ProbeStatus::PermError) j["code"] = error_code;
        j["usage"] = {{"prompt", usage.prompt_tokens},
                      {"completion", usage.completion_tokens}};
        return j;
    }

    static ScanRecord from_json(const ordered_json& j) {
        ScanRecord r;
        r.id = j.at("id").get<TokenId>();
        r.status = probe_status_from_string(j.at("status").get<std::string>());
        if (auto it = j.find("metrics"); it != j.end()) {
            ConfidenceMetrics m;
            m.entropy = it->at("entropy").get<double>();
            m.tail_prob = it->at("tail").get<double>();
            m.margin = it->at("margin").get<double>();
            m.top_prob = it->at("top_prob").get<double>();
            r.metrics = m;
        }
        r.error_code = j.value("code", 0);
        if (auto it = j.find("usage"); it != j.end()) {
            r.usage.prompt_tokens = it->value("prompt", uint64_t{0});
            r.usage.completion_tokens = it->value("completion", uint64_t{0});
        }
        return r;
    }
};

/// Parsed checkpoint contents plus the byte offset of the last complete
/// record, so a writer can truncate a torn tail before appending.
struct LoadedCheckpoint {
    std::string fingerprint;
    std::map<TokenId, ScanRecord> records;
    std::uintmax_t valid_bytes = 0;
};

/// 64-bit FNV-1a over the canonical config string; mixing scans from
/// different threshold or model regimes in one checkpoint is refused.
inline std::string config_fingerprint(const std::string& canonical) {
    uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char c : canonical) h = (h ^ c) * 0x100000001B3ull;
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(h));
    return buf;
}

/// Reads a newline-delimited-JSON checkpoint: one header record carrying the
/// config fingerprint, then one record per completed token. A torn trailing
/// line (crash mid-write) is tolerated and reported via valid_bytes.
inline LoadedCheckpoint load_scan_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CheckpointError("checkpoint: cannot open " + path);

    LoadedCheckpoint out;
    std::string line;
    bool have_header = false;
    std::uintmax_t offset = 0;
    while (std::getline(in, line)) {
        std::uintmax_t line_bytes = line.size() + 1;
        if (in.eof() && !in.good()) line_bytes = line.size();
        ordered_json j = ordered_json::parse(line, nullptr, false);
        if (j.is_discarded()) break;  // torn tail
        if (!have_header) {
            if (j.value("type", std::string()) != "header") {
                throw CheckpointError("checkpoint: missing header record in " +
                                      path);
            }
            out.fingerprint = j.value("fingerprint", std::string());
            have_header = true;
        } else {
            ScanRecord r;
            try {
                r = ScanRecord::from_json(j);
            } catch (const std::exception&) {
                break;  // treat malformed tail as torn
            }
            if (out.records.count(r.id)) {
                throw CheckpointError("checkpoint: duplicate record for id " +
                                      std::to_string(r.id));
            }
            out.records.emplace(r.id, r);
        }
        offset += line_bytes;
        out.valid_bytes = offset;
    }
    if (!have_header) {
        throw CheckpointError("checkpoint: missing header record in " + path);
    }
    return out;
}

/// Append-only checkpoint writer. Records are buffered and flushed in
/// batches of 100 or every 10 seconds, whichever comes first; the caller
/// must feed records in their final (ascending id) order.
class CheckpointWriter {
public:
    static constexpr size_t kFlushBatch = 100;
    static constexpr std::chrono::seconds kFlushInterval{10};

    /// Creates a fresh checkpoint with a header record.
    static CheckpointWriter create(const std::string& path,
                                   const std::string& fingerprint) {
        CheckpointWriter w;
        w.out_.open(path, std::ios::binary | std::ios::trunc);
        if (!w.out_) throw CheckpointError("checkpoint: cannot write " + path);
        ordered_json header;
        header["type"] = "header";
        header["version"] = 1;
        header["fingerprint"] = fingerprint;
        w.out_ << header.dump() << '\n';
        w.out_.flush();
        return w;
    }

    /// Opens an existing checkpoint for appending, truncating any torn tail.
    static CheckpointWriter append(const std::string& path,
                                   const LoadedCheckpoint& loaded) {
        if (std::filesystem::file_size(path) != loaded.valid_bytes) {
            std::filesystem::resize_file(path, loaded.valid_bytes);
        }
        CheckpointWriter w;
        w.out_.open(path, std::ios::binary | std::ios::app);
        if (!w.out_) throw CheckpointError("checkpoint: cannot append " + path);
        return w;
    }

    CheckpointWriter(CheckpointWriter&&) = default;
    CheckpointWriter& operator=(CheckpointWriter&&) = default;
    ~CheckpointWriter() { flush(); }

    void add(const ScanRecord& record) {
        pending_ += record.to_json().dump();
        pending_ += '\n';
        ++pending_count_;
        auto now = std::chrono::steady_clock::now();
        if (pending_count_ >= kFlushBatch || now - last_flush_ >= kFlushInterval) {
            flush();
        }
    }

    void add_line(const std::string& json_line) {
        pending_ += json_line;
        pending_ += '\n';
        ++pending_count_;
        if (pending_count_ >= kFlushBatch) flush();
    }

    void flush() {
        if (pending_count_ > 0 && out_.is_open()) {
            out_ << pending_;
            out_.flush();
        }
        pending_.clear();
        pending_count_ = 0;
        last_flush_ = std::chrono::steady_clock::now();
    }

private:
    CheckpointWriter() = default;

    std::ofstream out_;
    std::string pending_;
    size_t pending_count_ = 0;
    std::chrono::steady_clock::time_point last_flush_ =
        std::chrono::steady_clock::now();
};

} // namespace tokscan
