#pragma once

#include <cstdint>
#include <vector>

#include "hwrloop/recognizer.hpp"
#include "hwrloop/textgen.hpp"
#include "hwrloop/types.hpp"

namespace hwrloop {

// Data-parallel inner loops. Each kernel comes in a serial reference
// version and an OpenMP version over independent work items; the two are
// bit-identical by construction and the tests enforce it. Exec::Parallel
// falls back to the serial body when OpenMP is not compiled in.

std::vector<Prediction> predict_batch_serial(const Recognizer& model,
                                             std::span<const WordSample* const> samples);
std::vector<Prediction> predict_batch_parallel(const Recognizer& model,
                                               std::span<const WordSample* const> samples);
std::vector<Prediction> predict_batch(const Recognizer& model,
                                      std::span<const WordSample* const> samples,
                                      Exec exec = default_exec());

struct PagePlan {
    const User* writer = nullptr;
    Role role = Role::Train;
    std::uint32_t iteration_tag = 0;
    PageId page_id = 0;
};

std::vector<Page> render_pages_serial(const std::vector<PagePlan>& plan, const Vocabulary& vocab,
                                      const PrototypeTable& prototypes,
                                      const ExperimentConfig& config);
std::vector<Page> render_pages_parallel(const std::vector<PagePlan>& plan, const Vocabulary& vocab,
                                        const PrototypeTable& prototypes,
                                        const ExperimentConfig& config);
std::vector<Page> render_pages(const std::vector<PagePlan>& plan, const Vocabulary& vocab,
                               const PrototypeTable& prototypes, const ExperimentConfig& config,
                               Exec exec = default_exec());

} // namespace hwrloop
