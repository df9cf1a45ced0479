#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hwrloop/ledger.hpp"
#include "hwrloop/recognizer.hpp"
#include "hwrloop/rng.hpp"
#include "hwrloop/types.hpp"

namespace hwrloop {

// Replay plan for one upgrade iteration: the human-readable samples
// collected this iteration plus an equally sized replay set drawn from all
// earlier iterations (0 = the standard corpus), split as evenly as possible
// across sources.
struct CurriculumSchedule {
    std::uint32_t iteration = 0;
    std::vector<SampleId> current_samples;
    std::map<std::uint32_t, std::vector<SampleId>> replay_samples; // source -> ids
    std::vector<std::uint32_t> replay_with_replacement; // sources with undersized pools
    std::uint32_t epochs = 0;
    double initial_lr = 0.0;
    std::uint64_t shuffle_seed = 0;

    std::size_t replay_total() const;
    std::string digest() const;
};

struct TrainEpoch {
    std::uint32_t epoch = 0; // 1-based
    double lr = 0.0;
    double train_crr = 0.0;
    std::string schedule_digest;
};

struct TrainLog {
    std::vector<TrainEpoch> epochs;
    std::string to_json() const;
};

// Builds the iteration-t schedule: current = all human-readable train
// samples of the users funded at t; replay total equals |current|, the
// remainder going one extra sample to the lowest-numbered sources. Sources
// are drawn uniformly without replacement, falling back to with-replacement
// (and flagging the source) when a pool is smaller than its quota.
CurriculumSchedule build_curriculum(const DatasetLedger& ledger, std::uint32_t iteration,
                                    const std::vector<UserId>& selected_users, Rng& rng,
                                    const ExperimentConfig& config);

// Same shape with replay forced empty (plain fine-tuning).
CurriculumSchedule build_fine_tune_schedule(const DatasetLedger& ledger, std::uint32_t iteration,
                                            const std::vector<UserId>& selected_users, Rng& rng,
                                            const ExperimentConfig& config);

// Runs the schedule: resets the learning rate, then per epoch shuffles the
// interleaved current+replay stream, chunks it into batches and feeds
// train_step. Stops early once train CRR improves by less than
// early_stop_min_delta over early_stop_window epochs.
TrainLog train_with_curriculum(Recognizer& model, const DatasetLedger& ledger,
                               const CurriculumSchedule& schedule,
                               const ExperimentConfig& config);

TrainLog fine_tune_only(Recognizer& model, const DatasetLedger& ledger, std::uint32_t iteration,
                        const std::vector<UserId>& selected_users, Rng& rng,
                        const ExperimentConfig& config);

} // namespace hwrloop
