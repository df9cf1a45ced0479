#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace hwrloop {

// Index into the fixed symbol alphabet of size ExperimentConfig::alphabet_size.
using Symbol = std::uint16_t;
using Word = std::vector<Symbol>;

using UserId = std::uint32_t;
using PageId = std::uint32_t;
using SampleId = std::uint64_t;

enum class Readability : std::uint8_t { Readable, HardReadable, NonReadable };

enum class Role : std::uint8_t { Train, Validation, Test };

// Execution mode for the data-parallel kernels. Every kernel has a serial
// reference implementation; the parallel one must produce bit-identical
// results and is checked against it in the tests.
enum class Exec : std::uint8_t { Serial, Parallel };
Exec default_exec();

const char* to_string(Readability r);
const char* to_string(Role r);
Readability readability_from_string(const std::string& s);
Role role_from_string(const std::string& s);

// A sample is human-readable unless the experts tagged it non-readable.
inline bool is_human_readable(Readability r) { return r != Readability::NonReadable; }

// One handwritten word: ground-truth symbol sequence plus one observation
// vector per symbol, stored flat (|truth| x feature_dim).
struct WordSample {
    SampleId sample_id = 0;
    UserId user_id = 0;
    PageId page_id = 0;
    Role role = Role::Train;
    // 0 is reserved for the standard dataset; user samples carry the cohort
    // iteration at generation time and are re-stamped with the collection
    // iteration when their writer is selected.
    std::uint32_t iteration_tag = 0;
    Readability readability = Readability::Readable;
    Word truth;
    std::vector<float> observations; // truth.size() * feature_dim

    std::span<const float> observation(std::size_t i, std::size_t feature_dim) const {
        return std::span<const float>(observations.data() + i * feature_dim, feature_dim);
    }
};

// Per-writer distortion parameters.
struct WritingStyle {
    std::vector<double> offset;   // feature_dim
    double scale = 1.0;           // > 0
    double noise_sigma = 0.0;     // >= 0
    double corruption_rate = 0.0; // P(word is NonReadable)
    double hard_rate = 0.0;       // P(readable word is HardReadable)
};

struct User {
    UserId user_id = 0;
    WritingStyle style;
    std::uint32_t joined_iteration = 1; // 1..T for protocol users
    double difficulty = 0.0;
};

struct Page {
    PageId page_id = 0;
    UserId user_id = 0;
    Role role = Role::Train;
    std::uint32_t iteration_tag = 0;
    std::vector<WordSample> samples;
};

// Named RNG seeds, one per generation component plus the run master seed.
// Components left at 0 are derived from `master` when the config is loaded.
struct SeedSet {
    std::uint64_t master = 1234;
    std::uint64_t vocabulary = 0;
    std::uint64_t prototypes = 0;
    std::uint64_t styles = 0;
    std::uint64_t pages = 0;
    std::uint64_t train = 0;

    void resolve();
};

// Writer-style knobs. All rates are linear in the writer's difficulty d in
// [0,1] so that the three readability-related rates are non-decreasing in d.
struct StyleParams {
    double noise_sigma_min = 0.02;
    double noise_sigma_span = 0.16;   // sigma(d) = min + span * d
    double corruption_max = 0.10;     // corruption(d) = max * d
    double hard_max = 0.20;           // hard(d) = max * d
    double offset_base = 0.05;
    double offset_span = 0.55;        // |offset|(d) = base + span * d
    double scale_sigma_min = 0.02;
    double scale_sigma_span = 0.06;   // scale = exp(z * (min + span * d))
};

struct ExperimentConfig {
    // Cumulative user counts per iteration (N1, N2, N3).
    std::vector<std::uint32_t> growth_schedule = {4, 10, 15};
    std::uint32_t budget_m = 4;
    std::uint32_t pages_per_user = 23;
    std::uint32_t words_per_page = 50;
    std::uint32_t alphabet_size = 64;
    std::uint32_t feature_dim = 8;
    std::uint32_t max_word_len = 12;

    std::uint32_t vocab_size = 500;
    double zipf_exponent = 1.0;

    // Standard (iteration-0) corpus: writers the service already owns.
    // Each writes standard_pages train pages plus one held-out page.
    std::uint32_t standard_writers = 4;
    std::uint32_t standard_pages = 24;
    std::vector<double> standard_difficulties; // empty -> default ramp

    // Per-user difficulties; empty -> an easy-to-hard ramp within each
    // cohort so selection experiments are non-degenerate.
    std::vector<double> user_difficulties;

    StyleParams style;
    double prototype_min_separation = 1.0;

    SeedSet seeds;

    // Training hyperparameters. Momentum is carried for provenance only;
    // the centroid update has no use for it.
    double initial_lr = 0.001;
    std::uint32_t epochs_per_iteration = 20;
    std::uint32_t batch_size = 64;
    double optimizer_momentum = 0.09;
    double early_stop_min_delta = 0.1; // train-CRR points over the window
    std::uint32_t early_stop_window = 3;
    bool replay_resample_per_epoch = false;
    // <= 0 selects the saturating default derived from the trained
    // centroids at pretraining time.
    double confidence_temperature = 0.0;

    std::uint32_t iterations() const { return static_cast<std::uint32_t>(growth_schedule.size()); }
    std::uint32_t total_users() const { return growth_schedule.empty() ? 0 : growth_schedule.back(); }
    UserId standard_writer_base() const { return 100; }

    std::uint32_t cohort_of(UserId user_id) const; // joined_iteration for 1-based protocol user ids
    double difficulty_of(UserId user_id) const;
    double standard_difficulty_of(std::uint32_t writer_index) const;

    // Throws config_error on any invariant violation.
    void validate() const;
};

// Fixed-schema JSON (see README). Unknown keys are rejected.
ExperimentConfig config_from_json_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);
std::string config_to_json_text(const ExperimentConfig& config);

// Fixed-width float formatting used for every serialized artifact:
// 9 significant digits round-trips binary32 exactly, 17 binary64.
std::string format_float(float v);
std::string format_double(double v);

} // namespace hwrloop
