#include "hwrloop/textgen.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "hwrloop/digest.hpp"
#include "hwrloop/errors.hpp"
#include "hwrloop/kernels.hpp"

namespace hwrloop {

std::uint32_t Vocabulary::sample_index(Rng& rng) const {
    const double u = rng.next_double() * cumulative.back();
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    const std::size_t idx = static_cast<std::size_t>(it - cumulative.begin());
    return static_cast<std::uint32_t>(std::min(idx, words.size() - 1));
}

std::string Vocabulary::digest() const {
    Digest d;
    for (const Word& w : words) {
        d.update_u64(w.size());
        for (Symbol s : w) d.update_u64(s);
    }
    for (double w : weights) d.update(format_double(w));
    return d.hex();
}

Vocabulary gen_vocabulary(std::uint64_t seed, std::uint32_t size, std::uint32_t alphabet_size,
                          std::uint32_t max_word_len, double zipf_exponent) {
    if (size == 0) throw config_error("vocabulary size must be at least 1");
    if (alphabet_size < 2) throw config_error("alphabet_size must be at least 2");
    if (max_word_len == 0) throw config_error("max_word_len must be positive");

    Rng rng(seed);
    Vocabulary vocab;
    vocab.words.reserve(size);
    std::set<Word> dedup;
    while (vocab.words.size() < size) {
        const std::uint32_t len = 1 + static_cast<std::uint32_t>(rng.next_below(max_word_len));
        Word w(len);
        for (std::uint32_t i = 0; i < len; ++i)
            w[i] = static_cast<Symbol>(rng.next_below(alphabet_size));
        if (dedup.insert(w).second) vocab.words.push_back(std::move(w));
    }

    vocab.weights.resize(size);
    vocab.cumulative.resize(size);
    double acc = 0.0;
    for (std::uint32_t k = 0; k < size; ++k) {
        vocab.weights[k] = std::pow(static_cast<double>(k + 1), -zipf_exponent);
        acc += vocab.weights[k];
        vocab.cumulative[k] = acc;
    }

    const std::uint32_t tail = std::max<std::uint32_t>(1, size / 10);
    for (std::uint32_t k = size - tail; k < size; ++k) vocab.rare_tail.push_back(k);
    return vocab;
}

double PrototypeTable::min_pairwise_distance() const {
    const std::uint32_t n = size();
    double best = std::numeric_limits<double>::infinity();
    for (std::uint32_t a = 0; a < n; ++a) {
        for (std::uint32_t b = a + 1; b < n; ++b) {
            double sq = 0.0;
            for (std::uint32_t d = 0; d < feature_dim; ++d) {
                const double diff = data[a * feature_dim + d] - data[b * feature_dim + d];
                sq += diff * diff;
            }
            best = std::min(best, sq);
        }
    }
    return std::sqrt(best);
}

PrototypeTable gen_prototypes(std::uint64_t seed, std::uint32_t alphabet_size,
                              std::uint32_t feature_dim, double min_separation) {
    if (alphabet_size < 2) throw config_error("alphabet_size must be at least 2");
    if (feature_dim == 0) throw config_error("feature_dim must be positive");

    Rng rng(seed);
    PrototypeTable table;
    table.feature_dim = feature_dim;
    table.data.reserve(static_cast<std::size_t>(alphabet_size) * feature_dim);

    const double min_sq = min_separation * min_separation;
    std::vector<double> candidate(feature_dim);
    for (std::uint32_t c = 0; c < alphabet_size; ++c) {
        bool placed = false;
        for (int attempt = 0; attempt < 10000 && !placed; ++attempt) {
            for (std::uint32_t d = 0; d < feature_dim; ++d) candidate[d] = rng.next_gaussian();
            placed = true;
            for (std::uint32_t prev = 0; prev < c && placed; ++prev) {
                double sq = 0.0;
                for (std::uint32_t d = 0; d < feature_dim; ++d) {
                    const double diff = candidate[d] - table.data[prev * feature_dim + d];
                    sq += diff * diff;
                }
                if (sq < min_sq) placed = false;
            }
        }
        if (!placed)
            throw config_error("cannot place " + std::to_string(alphabet_size) +
                               " prototypes at separation " + std::to_string(min_separation) +
                               " in dimension " + std::to_string(feature_dim));
        table.data.insert(table.data.end(), candidate.begin(), candidate.end());
    }
    return table;
}

User gen_user(std::uint64_t seed, UserId user_id, std::uint32_t joined_iteration,
              double difficulty, const StyleParams& params, std::uint32_t feature_dim) {
    Rng rng(seed);
    User u;
    u.user_id = user_id;
    u.joined_iteration = joined_iteration;
    u.difficulty = difficulty;

    // Random offset direction with a difficulty-scaled magnitude.
    std::vector<double> dir(feature_dim);
    double norm_sq = 0.0;
    for (std::uint32_t d = 0; d < feature_dim; ++d) {
        dir[d] = rng.next_gaussian();
        norm_sq += dir[d] * dir[d];
    }
    const double norm = std::sqrt(norm_sq);
    const double magnitude = params.offset_base + params.offset_span * difficulty;
    u.style.offset.resize(feature_dim);
    for (std::uint32_t d = 0; d < feature_dim; ++d)
        u.style.offset[d] = norm > 1e-12 ? dir[d] / norm * magnitude : (d == 0 ? magnitude : 0.0);

    const double scale_sigma = params.scale_sigma_min + params.scale_sigma_span * difficulty;
    u.style.scale = std::exp(rng.next_gaussian() * scale_sigma);
    u.style.noise_sigma = params.noise_sigma_min + params.noise_sigma_span * difficulty;
    u.style.corruption_rate = params.corruption_max * difficulty;
    u.style.hard_rate = params.hard_max * difficulty;
    return u;
}

WordSample render_word(const Word& word, const WritingStyle& style,
                       const PrototypeTable& prototypes, Rng& rng) {
    if (word.empty()) throw protocol_error("cannot render an empty word");
    const std::uint32_t dim = prototypes.feature_dim;
    const std::uint32_t alphabet_size = prototypes.size();

    WordSample sample;
    const double u = rng.next_double();
    if (u < style.corruption_rate)
        sample.readability = Readability::NonReadable;
    else if (u < style.corruption_rate + style.hard_rate)
        sample.readability = Readability::HardReadable;
    else
        sample.readability = Readability::Readable;

    sample.truth = word;
    if (sample.readability == Readability::NonReadable) {
        // Spelling-mistake model: corrupt the recorded label, not the ink.
        const std::size_t n_subst = word.size() == 1 ? 1 : 1 + rng.next_below(2);
        std::vector<std::size_t> positions;
        while (positions.size() < n_subst) {
            const std::size_t pos = static_cast<std::size_t>(rng.next_below(word.size()));
            if (std::find(positions.begin(), positions.end(), pos) == positions.end())
                positions.push_back(pos);
        }
        for (std::size_t pos : positions) {
            Symbol replacement = sample.truth[pos];
            while (replacement == word[pos])
                replacement = static_cast<Symbol>(rng.next_below(alphabet_size));
            sample.truth[pos] = replacement;
        }
    }

    const double sigma_eff =
        sample.readability == Readability::HardReadable ? 2.0 * style.noise_sigma
                                                        : style.noise_sigma;
    sample.observations.resize(static_cast<std::size_t>(word.size()) * dim);
    for (std::size_t i = 0; i < word.size(); ++i) {
        const auto proto = prototypes.row(word[i]);
        for (std::uint32_t d = 0; d < dim; ++d) {
            const double value = style.scale * (proto[d] + style.offset[d]) +
                                 sigma_eff * rng.next_gaussian();
            sample.observations[i * dim + d] = static_cast<float>(value);
        }
    }
    return sample;
}

Page gen_page(const User& user, const Vocabulary& vocab, const PrototypeTable& prototypes,
              Role role, std::uint32_t n_words, std::uint32_t iteration_tag, PageId page_id,
              std::uint64_t sample_id_stride, Rng& rng) {
    if (n_words == 0) throw protocol_error("a page must contain at least one word");
    Page page;
    page.page_id = page_id;
    page.user_id = user.user_id;
    page.role = role;
    page.iteration_tag = iteration_tag;
    page.samples.reserve(n_words);
    for (std::uint32_t w = 0; w < n_words; ++w) {
        const std::uint32_t idx = vocab.sample_index(rng);
        WordSample sample = render_word(vocab.words[idx], user.style, prototypes, rng);
        sample.sample_id = static_cast<SampleId>(page_id) * sample_id_stride + w;
        sample.user_id = user.user_id;
        sample.page_id = page_id;
        sample.role = role;
        sample.iteration_tag = iteration_tag;
        page.samples.push_back(std::move(sample));
    }
    return page;
}

std::string page_digest(const Page& page) {
    Digest d;
    d.update_u64(page.page_id);
    d.update_u64(page.user_id);
    d.update_u64(static_cast<std::uint64_t>(page.role));
    for (const WordSample& s : page.samples) {
        d.update_u64(s.sample_id);
        d.update_u64(static_cast<std::uint64_t>(s.readability));
        for (Symbol c : s.truth) d.update_u64(c);
        for (float v : s.observations) d.update(format_float(v));
    }
    return d.hex();
}

GeneratedWorld generate_world(const ExperimentConfig& config, Exec exec) {
    config.validate();
    GeneratedWorld world;
    world.vocabulary = gen_vocabulary(config.seeds.vocabulary, config.vocab_size,
                                      config.alphabet_size, config.max_word_len,
                                      config.zipf_exponent);
    world.prototypes = gen_prototypes(config.seeds.prototypes, config.alphabet_size,
                                      config.feature_dim, config.prototype_min_separation);

    for (std::uint32_t i = 0; i < config.standard_writers; ++i) {
        const UserId id = config.standard_writer_base() + i;
        world.standard_writers.push_back(gen_user(derive_stream(config.seeds.styles, id), id, 0,
                                                  config.standard_difficulty_of(i), config.style,
                                                  config.feature_dim));
    }
    for (UserId id = 1; id <= config.total_users(); ++id) {
        world.users.push_back(gen_user(derive_stream(config.seeds.styles, id), id,
                                       config.cohort_of(id), config.difficulty_of(id),
                                       config.style, config.feature_dim));
    }

    // Fixed page plan; each page renders from its own derived stream, so the
    // rendering order (or thread assignment) cannot change the output.
    std::vector<PagePlan> plan;
    PageId next_page = 1;
    for (const User& writer : world.standard_writers) {
        for (std::uint32_t p = 0; p < config.standard_pages; ++p)
            plan.push_back({&writer, Role::Train, 0, next_page++});
        plan.push_back({&writer, Role::Test, 0, next_page++});
    }
    for (const User& user : world.users) {
        for (std::uint32_t p = 0; p < config.pages_per_user; ++p)
            plan.push_back({&user, Role::Train, user.joined_iteration, next_page++});
        plan.push_back({&user, Role::Validation, user.joined_iteration, next_page++});
        plan.push_back({&user, Role::Test, user.joined_iteration, next_page++});
    }

    world.pages = render_pages(plan, world.vocabulary, world.prototypes, config, exec);
    return world;
}

} // namespace hwrloop
