#include "hwrloop/curriculum.hpp"

#include <algorithm>
#include <sstream>

#include "hwrloop/digest.hpp"
#include "hwrloop/errors.hpp"
#include "hwrloop/kernels.hpp"
#include "hwrloop/metrics.hpp"

namespace hwrloop {

std::size_t CurriculumSchedule::replay_total() const {
    std::size_t total = 0;
    for (const auto& [source, ids] : replay_samples) total += ids.size();
    return total;
}

std::string CurriculumSchedule::digest() const {
    Digest d;
    d.update_u64(iteration);
    d.update_u64(current_samples.size());
    for (SampleId id : current_samples) d.update_u64(id);
    for (const auto& [source, ids] : replay_samples) {
        d.update_u64(source);
        d.update_u64(ids.size());
        for (SampleId id : ids) d.update_u64(id);
    }
    d.update_u64(epochs);
    d.update(format_double(initial_lr));
    d.update_u64(shuffle_seed);
    return d.hex();
}

std::string TrainLog::to_json() const {
    std::ostringstream out;
    out << "[";
    for (std::size_t i = 0; i < epochs.size(); ++i) {
        if (i) out << ',';
        out << "{\"epoch\":" << epochs[i].epoch << ",\"lr\":" << format_double(epochs[i].lr)
            << ",\"train_crr\":" << format_double(epochs[i].train_crr)
            << ",\"schedule_digest\":\"" << epochs[i].schedule_digest << "\"}";
    }
    out << "]";
    return out.str();
}

namespace {

std::vector<SampleId> draw_from_pool(const std::vector<const WordSample*>& pool, std::size_t quota,
                                     Rng& rng, bool& with_replacement) {
    std::vector<SampleId> out;
    out.reserve(quota);
    if (quota == 0) {
        with_replacement = false;
        return out;
    }
    if (pool.empty()) throw protocol_error("empty replay pool");
    if (pool.size() >= quota) {
        with_replacement = false;
        // Partial Fisher-Yates: the first `quota` slots are a uniform draw
        // without replacement.
        std::vector<std::uint32_t> idx(pool.size());
        for (std::uint32_t i = 0; i < idx.size(); ++i) idx[i] = i;
        for (std::size_t i = 0; i < quota; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(rng.next_below(idx.size() - i));
            std::swap(idx[i], idx[j]);
            out.push_back(pool[idx[i]]->sample_id);
        }
    } else {
        with_replacement = true;
        for (std::size_t i = 0; i < quota; ++i)
            out.push_back(pool[rng.next_below(pool.size())]->sample_id);
    }
    std::sort(out.begin(), out.end());
    return out;
}

CurriculumSchedule make_schedule(const DatasetLedger& ledger, std::uint32_t iteration,
                                 const std::vector<UserId>& selected_users, Rng& rng,
                                 const ExperimentConfig& config, bool with_replay) {
    if (iteration < 1) throw protocol_error("curriculum iterations start at 1");

    CurriculumSchedule schedule;
    schedule.iteration = iteration;
    schedule.epochs = config.epochs_per_iteration;
    schedule.initial_lr = config.initial_lr;

    std::vector<UserId> users = selected_users;
    std::sort(users.begin(), users.end());
    for (UserId id : users) {
        for (const WordSample* s : ledger.train_samples_of(id)) {
            if (!is_human_readable(s->readability)) continue;
            if (s->iteration_tag != iteration)
                throw protocol_error("train sample " + std::to_string(s->sample_id) +
                                     " not collected at iteration " + std::to_string(iteration));
            schedule.current_samples.push_back(s->sample_id);
        }
    }
    if (schedule.current_samples.empty())
        throw protocol_error("no human-readable training samples at iteration " +
                             std::to_string(iteration));

    if (with_replay) {
        const std::size_t total = schedule.current_samples.size();
        const std::size_t base = total / iteration;
        const std::size_t remainder = total % iteration;
        for (std::uint32_t source = 0; source < iteration; ++source) {
            const std::size_t quota = base + (source < remainder ? 1 : 0);
            bool used_replacement = false;
            schedule.replay_samples[source] =
                draw_from_pool(ledger.hr_train_pool(source), quota, rng, used_replacement);
            if (used_replacement) schedule.replay_with_replacement.push_back(source);
        }
    }

    schedule.shuffle_seed = rng.next_u64();
    return schedule;
}

std::vector<const WordSample*> resolve(const DatasetLedger& ledger,
                                       const CurriculumSchedule& schedule) {
    std::vector<const WordSample*> stream;
    stream.reserve(schedule.current_samples.size() + schedule.replay_total());
    for (SampleId id : schedule.current_samples) stream.push_back(&ledger.sample(id));
    for (const auto& [source, ids] : schedule.replay_samples)
        for (SampleId id : ids) stream.push_back(&ledger.sample(id));
    return stream;
}

} // namespace

CurriculumSchedule build_curriculum(const DatasetLedger& ledger, std::uint32_t iteration,
                                    const std::vector<UserId>& selected_users, Rng& rng,
                                    const ExperimentConfig& config) {
    return make_schedule(ledger, iteration, selected_users, rng, config, true);
}

CurriculumSchedule build_fine_tune_schedule(const DatasetLedger& ledger, std::uint32_t iteration,
                                            const std::vector<UserId>& selected_users, Rng& rng,
                                            const ExperimentConfig& config) {
    return make_schedule(ledger, iteration, selected_users, rng, config, false);
}

TrainLog train_with_curriculum(Recognizer& model, const DatasetLedger& ledger,
                               const CurriculumSchedule& schedule,
                               const ExperimentConfig& config) {
    TrainLog log;
    const std::string schedule_digest = schedule.digest();
    std::vector<const WordSample*> stream = resolve(ledger, schedule);
    Rng rng(schedule.shuffle_seed);

    const double lr = schedule.initial_lr; // reset: constant within the run
    for (std::uint32_t epoch = 1; epoch <= schedule.epochs; ++epoch) {
        if (config.replay_resample_per_epoch && epoch > 1 && !schedule.replay_samples.empty()) {
            CurriculumSchedule redraw = schedule;
            redraw.replay_samples.clear();
            redraw.replay_with_replacement.clear();
            for (const auto& [source, ids] : schedule.replay_samples) {
                bool used_replacement = false;
                redraw.replay_samples[source] = draw_from_pool(ledger.hr_train_pool(source),
                                                               ids.size(), rng, used_replacement);
            }
            stream = resolve(ledger, redraw);
        }
        rng.shuffle(stream);
        for (std::size_t start = 0; start < stream.size(); start += config.batch_size) {
            const std::size_t count = std::min<std::size_t>(config.batch_size,
                                                            stream.size() - start);
            model.train_step(std::span<const WordSample* const>(stream.data() + start, count), lr);
        }

        const auto predictions = predict_batch(model, stream);
        const double train_crr = evaluate(predictions, stream).crr();
        log.epochs.push_back({epoch, lr, train_crr, schedule_digest});

        if (log.epochs.size() > config.early_stop_window) {
            const double before =
                log.epochs[log.epochs.size() - 1 - config.early_stop_window].train_crr;
            if (train_crr - before < config.early_stop_min_delta) break;
        }
    }
    return log;
}

TrainLog fine_tune_only(Recognizer& model, const DatasetLedger& ledger, std::uint32_t iteration,
                        const std::vector<UserId>& selected_users, Rng& rng,
                        const ExperimentConfig& config) {
    const auto schedule = build_fine_tune_schedule(ledger, iteration, selected_users, rng, config);
    return train_with_curriculum(model, ledger, schedule, config);
}

} // namespace hwrloop
