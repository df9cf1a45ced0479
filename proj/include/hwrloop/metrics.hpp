#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "hwrloop/recognizer.hpp"
#include "hwrloop/types.hpp"

namespace hwrloop {

class DatasetLedger;
enum class Exec;

// Unit-cost edit distance between two symbol sequences.
std::uint64_t levenshtein(std::span<const Symbol> a, std::span<const Symbol> b);

// Accumulated evaluation counts. Rates are derived so that results merge
// exactly: merging per-user results and evaluating the whole split give
// identical numbers.
struct EvalResult {
    std::uint64_t n_words = 0;
    std::uint64_t n_words_hr = 0;
    std::uint64_t n_chars = 0; // total ground-truth symbols
    std::uint64_t n_exact = 0;
    std::uint64_t n_exact_hr = 0;
    std::uint64_t edit_total = 0;
    double conf_sum = 0.0;
    std::uint64_t n_conf_chars = 0;

    double crr() const {
        if (n_chars == 0) return 0.0;
        const double rate = 1.0 - static_cast<double>(edit_total) / static_cast<double>(n_chars);
        return 100.0 * (rate > 0.0 ? rate : 0.0);
    }
    double wrr() const {
        return n_words ? 100.0 * static_cast<double>(n_exact) / static_cast<double>(n_words) : 0.0;
    }
    double wrr_hr() const {
        return n_words_hr
                   ? 100.0 * static_cast<double>(n_exact_hr) / static_cast<double>(n_words_hr)
                   : 0.0;
    }
    double avg_char_confidence() const {
        return n_conf_chars ? conf_sum / static_cast<double>(n_conf_chars) : 0.0;
    }

    void merge(const EvalResult& other);
    void add(const Prediction& prediction, const WordSample& sample);
};

// Scores aligned (prediction, sample) pairs. WRR is exact sequence match,
// CRR the clamped corpus-level edit-distance rate, WRR-HR the word rate over
// the human-readable subset. Throws on empty or misaligned input.
EvalResult evaluate(std::span<const Prediction> predictions,
                    std::span<const WordSample* const> samples);

// One EvalResult per user owning a page in `split` (Validation or Test),
// keyed and ordered by user_id. `user_filter`, when non-empty, restricts the
// evaluation to those users and errors if one has no page in the split.
std::map<UserId, EvalResult> per_user_eval(const Recognizer& model, const DatasetLedger& ledger,
                                           Role split,
                                           const std::vector<UserId>& user_filter = {});

// Fixed-schema CSV row block: user_id, split, n_words, n_words_hr, crr, wrr,
// wrr_hr, avg_conf. Rates use 2-decimal fixed point, confidences 4.
std::string per_user_csv(const std::map<UserId, EvalResult>& results, Role split,
                         bool header = true);

} // namespace hwrloop
