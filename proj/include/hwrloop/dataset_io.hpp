#pragma once

#include <string>
#include <vector>

#include "hwrloop/ledger.hpp"
#include "hwrloop/types.hpp"

namespace hwrloop {

// Canonical JSON-Lines row for one WordSample. Field order is fixed:
// sample_id, user_id, page_id, role, iteration_tag, readability, truth,
// observations. Observation floats use 9 significant digits, which
// round-trips binary32 exactly.
std::string serialize_sample(const WordSample& sample);
WordSample parse_sample(const std::string& line);

void write_ledger_jsonl(const std::string& path, const DatasetLedger& ledger);
std::vector<WordSample> read_samples_jsonl(const std::string& path);

// Dataset manifest: resolved config, per-writer style parameters, counts,
// and the content digest of ledger.jsonl.
struct ManifestWriter {
    const ExperimentConfig* config = nullptr;
    const std::vector<User>* users = nullptr;            // protocol users
    const std::vector<User>* standard_writers = nullptr; // joined_iteration 0
    std::string dataset_digest;
    std::size_t n_samples = 0;
    std::size_t n_pages = 0;

    std::string to_json() const;
};

struct Manifest {
    ExperimentConfig config;
    std::vector<User> users;
    std::vector<User> standard_writers;
    std::string dataset_digest;
};

Manifest parse_manifest(const std::string& text);
Manifest load_manifest(const std::string& path);

// Loads a dataset directory written by `gen` (manifest.json + ledger.jsonl),
// verifying the content digest, and rebuilds the ledger.
struct LoadedDataset {
    Manifest manifest;
    DatasetLedger ledger;
};

LoadedDataset load_dataset(const std::string& dir);

// Generates the synthetic world for `config` and packages it as a dataset
// (the digest covers the canonical ledger.jsonl bytes).
LoadedDataset make_dataset(const ExperimentConfig& config, Exec exec);
void save_dataset(const LoadedDataset& dataset, const std::string& dir);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

} // namespace hwrloop
