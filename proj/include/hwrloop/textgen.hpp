#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hwrloop/rng.hpp"
#include "hwrloop/types.hpp"

namespace hwrloop {

// Synthetic word list with Zipf-like sampling weights.
struct Vocabulary {
    std::vector<Word> words;        // unique, lengths in [1, max_word_len]
    std::vector<double> weights;    // descending with generation rank
    std::vector<double> cumulative;
    std::vector<std::uint32_t> rare_tail; // bottom decile by weight

    std::uint32_t sample_index(Rng& rng) const;
    std::string digest() const;
};

Vocabulary gen_vocabulary(std::uint64_t seed, std::uint32_t size, std::uint32_t alphabet_size,
                          std::uint32_t max_word_len, double zipf_exponent = 1.0);

// Canonical glyph embedding per symbol.
struct PrototypeTable {
    std::uint32_t feature_dim = 0;
    std::vector<double> data; // alphabet_size x feature_dim

    std::uint32_t size() const {
        return feature_dim ? static_cast<std::uint32_t>(data.size() / feature_dim) : 0;
    }
    std::span<const double> row(Symbol s) const {
        return std::span<const double>(data.data() + static_cast<std::size_t>(s) * feature_dim,
                                       feature_dim);
    }
    double min_pairwise_distance() const;
};

PrototypeTable gen_prototypes(std::uint64_t seed, std::uint32_t alphabet_size,
                              std::uint32_t feature_dim, double min_separation);

// Writer style as a deterministic function of difficulty plus a seeded
// random offset direction and scale draw. noise_sigma, corruption_rate and
// hard_rate are non-decreasing in difficulty.
User gen_user(std::uint64_t seed, UserId user_id, std::uint32_t joined_iteration,
              double difficulty, const StyleParams& params, std::uint32_t feature_dim);

// Renders one word: observation_i = scale * (prototype(written_i) + offset)
// + N(0, sigma_eff^2), where sigma_eff doubles for hard-readable samples.
// Non-readable samples get 1-2 substitutions in the *recorded* truth, so the
// stored label no longer matches what was written. Only truth, observations
// and readability are filled in; ids are stamped by the caller.
WordSample render_word(const Word& word, const WritingStyle& style,
                       const PrototypeTable& prototypes, Rng& rng);

Page gen_page(const User& user, const Vocabulary& vocab, const PrototypeTable& prototypes,
              Role role, std::uint32_t n_words, std::uint32_t iteration_tag, PageId page_id,
              std::uint64_t sample_id_stride, Rng& rng);

std::string page_digest(const Page& page);

// The full synthetic world for one config: vocabulary, prototypes, the
// standard corpus writers (joined_iteration 0), the protocol users, and
// every page. Page rendering is a pure function of (seed, page_id), so the
// parallel path is bit-identical to the serial one.
struct GeneratedWorld {
    Vocabulary vocabulary;
    PrototypeTable prototypes;
    std::vector<User> standard_writers;
    std::vector<User> users;
    std::vector<Page> pages;
};

GeneratedWorld generate_world(const ExperimentConfig& config, Exec exec);

} // namespace hwrloop
