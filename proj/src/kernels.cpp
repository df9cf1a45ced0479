#include "hwrloop/kernels.hpp"

#include "hwrloop/rng.hpp"

namespace hwrloop {

Exec default_exec() {
#ifdef _OPENMP
    return Exec::Parallel;
#else
    return Exec::Serial;
#endif
}

std::vector<Prediction> predict_batch_serial(const Recognizer& model,
                                             std::span<const WordSample* const> samples) {
    std::vector<Prediction> out(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) out[i] = model.predict(*samples[i]);
    return out;
}

std::vector<Prediction> predict_batch_parallel(const Recognizer& model,
                                               std::span<const WordSample* const> samples) {
    std::vector<Prediction> out(samples.size());
#ifdef _OPENMP
    const std::int64_t n = static_cast<std::int64_t>(samples.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) out[i] = model.predict(*samples[i]);
#else
    for (std::size_t i = 0; i < samples.size(); ++i) out[i] = model.predict(*samples[i]);
#endif
    return out;
}

std::vector<Prediction> predict_batch(const Recognizer& model,
                                      std::span<const WordSample* const> samples, Exec exec) {
    return exec == Exec::Parallel ? predict_batch_parallel(model, samples)
                                  : predict_batch_serial(model, samples);
}

namespace {

Page render_one(const PagePlan& p, const Vocabulary& vocab, const PrototypeTable& prototypes,
                const ExperimentConfig& config) {
    Rng rng(derive_stream(config.seeds.pages, p.page_id));
    return gen_page(*p.writer, vocab, prototypes, p.role, config.words_per_page, p.iteration_tag,
                    p.page_id, config.words_per_page, rng);
}

} // namespace

std::vector<Page> render_pages_serial(const std::vector<PagePlan>& plan, const Vocabulary& vocab,
                                      const PrototypeTable& prototypes,
                                      const ExperimentConfig& config) {
    std::vector<Page> pages(plan.size());
    for (std::size_t i = 0; i < plan.size(); ++i)
        pages[i] = render_one(plan[i], vocab, prototypes, config);
    return pages;
}

std::vector<Page> render_pages_parallel(const std::vector<PagePlan>& plan, const Vocabulary& vocab,
                                        const PrototypeTable& prototypes,
                                        const ExperimentConfig& config) {
    std::vector<Page> pages(plan.size());
#ifdef _OPENMP
    const std::int64_t n = static_cast<std::int64_t>(plan.size());
#pragma omp parallel for schedule(dynamic, 4)
    for (std::int64_t i = 0; i < n; ++i) pages[i] = render_one(plan[i], vocab, prototypes, config);
#else
    for (std::size_t i = 0; i < plan.size(); ++i)
        pages[i] = render_one(plan[i], vocab, prototypes, config);
#endif
    return pages;
}

std::vector<Page> render_pages(const std::vector<PagePlan>& plan, const Vocabulary& vocab,
                               const PrototypeTable& prototypes, const ExperimentConfig& config,
                               Exec exec) {
    return exec == Exec::Parallel ? render_pages_parallel(plan, vocab, prototypes, config)
                                  : render_pages_serial(plan, vocab, prototypes, config);
}

} // namespace hwrloop
