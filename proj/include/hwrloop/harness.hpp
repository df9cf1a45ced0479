#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "hwrloop/curriculum.hpp"
#include "hwrloop/dataset_io.hpp"
#include "hwrloop/ledger.hpp"
#include "hwrloop/metrics.hpp"
#include "hwrloop/recognizer.hpp"
#include "hwrloop/selection.hpp"

namespace hwrloop {

// Experiment variants: single-iteration fine-tune vs curriculum, the full
// multi-iteration loop, the two swap ablations (applied at iteration 2), and
// the selection-rule ablations.
enum class Variant : std::uint8_t {
    Iter1FT,
    Iter1CL,
    IterTCLm,
    SwapS1,
    SwapS2,
    WorstWrrAblation,
    RandomAblation,
};

const char* to_string(Variant v);
Variant variant_from_string(const std::string& s);

struct RunConfig {
    ExperimentConfig experiment;
    Variant variant = Variant::IterTCLm;
    std::uint64_t seed = 1; // training-time randomness (shuffle, replay, random policy)
    std::string data_dir;
    std::string out_dir; // empty: keep the run in memory only
};

struct CandidateScore {
    UserId user_id = 0;
    EvalResult result;
};

struct ConfidencePoint {
    UserId user_id = 0;
    double avg_confidence = 0.0;
    double crr = 0.0;
};

struct IterationReport {
    std::uint32_t iteration = 0;
    std::string policy;
    std::vector<CandidateScore> candidates; // validation scores driving selection
    std::vector<UserId> selected;
    CurriculumSchedule schedule;
    TrainLog train_log;
    std::string checkpoint_digest;
    std::string test_digest;
    std::map<UserId, EvalResult> per_user_test;
    EvalResult aggregate_test;
    EvalResult seen_test;   // users funded in iterations <= t
    EvalResult unseen_test; // the rest
    EvalResult standard_holdout;
    std::vector<ConfidencePoint> confidence_crr; // per test user

    std::string to_json() const;
};

struct SummaryRow {
    std::uint32_t iteration = 0;
    std::string model;
    double all_crr = 0, all_wrr = 0;
    double seen_crr = 0, seen_wrr = 0;
    double unseen_crr = 0, unseen_wrr = 0;
};

struct RunResult {
    Variant variant = Variant::IterTCLm;
    std::uint64_t seed = 0;
    std::string dataset_digest;
    std::string iter0_checkpoint_digest;
    std::vector<IterationReport> reports;
    std::map<std::uint32_t, std::vector<UserId>> selected_by_iteration;
    std::vector<UserId> common_seen;  // iteration-1 cohort
    std::vector<UserId> common_unseen; // never funded in this run
    std::vector<SummaryRow> summary;
    std::string summary_csv;
    std::string run_log; // JSONL protocol event stream
};

// Protocol state threaded through the iterations. The model is borrowed so
// the loop runs against any Recognizer implementation.
struct RunState {
    DatasetLedger ledger;
    Recognizer* model = nullptr;
    Rng rng;
    bool fine_tune = false; // replay suppressed (FT variants)
    std::ostringstream log;
};

// One protocol round: evaluate candidates with the previous model, select
// under the budget, collect the funded users' pages, drop non-readable
// samples, build the replay schedule, train with the learning rate reset,
// and evaluate on the fixed test set. Iteration 1 skips the evaluate/select
// steps and takes the initial cohort as funded.
IterationReport run_iteration(RunState& state, std::uint32_t iteration,
                              const SelectionPolicy& policy, const ExperimentConfig& config);

// Full run against the built-in recognizer (pretrained on the standard
// corpus), writing run artifacts when out_dir is set.
RunResult run_experiment(const RunConfig& config);
RunResult run_experiment(const RunConfig& config, const LoadedDataset& dataset);
// Same loop against a caller-supplied, already initialized recognizer.
RunResult run_experiment(const RunConfig& config, const LoadedDataset& dataset,
                         Recognizer& model);

std::string run_json(const RunResult& run);

// Side-by-side comparison of completed run directories over one dataset.
// Throws protocol_error on a manifest mismatch.
std::string compare_runs(const std::vector<std::string>& run_dirs);

// Re-emits a completed run: "csv" gives the per-user test results of every
// iteration (iteration-prefixed rows), "json" the summary plus the full
// iteration reports.
std::string report_from_run_dir(const std::string& run_dir, const std::string& format);

// Number of protocol iterations a variant executes under `config`.
std::uint32_t variant_iterations(Variant v, const ExperimentConfig& config);
std::string model_label(Variant v, std::uint32_t iteration);

} // namespace hwrloop
