#include "hwrloop/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "hwrloop/errors.hpp"
#include "hwrloop/kernels.hpp"
#include "hwrloop/ledger.hpp"

namespace hwrloop {

std::uint64_t levenshtein(std::span<const Symbol> a, std::span<const Symbol> b) {
    if (a.size() < b.size()) std::swap(a, b); // keep the rolling rows short
    const std::size_t n = b.size();
    if (n == 0) return a.size();

    std::vector<std::uint64_t> prev(n + 1), curr(n + 1);
    for (std::size_t j = 0; j <= n; ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        curr[0] = i;
        for (std::size_t j = 1; j <= n; ++j) {
            const std::uint64_t subst = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            curr[j] = std::min({prev[j] + 1, curr[j - 1] + 1, subst});
        }
        std::swap(prev, curr);
    }
    return prev[n];
}

void EvalResult::merge(const EvalResult& other) {
    n_words += other.n_words;
    n_words_hr += other.n_words_hr;
    n_chars += other.n_chars;
    n_exact += other.n_exact;
    n_exact_hr += other.n_exact_hr;
    edit_total += other.edit_total;
    conf_sum += other.conf_sum;
    n_conf_chars += other.n_conf_chars;
}

void EvalResult::add(const Prediction& prediction, const WordSample& sample) {
    const bool exact = prediction.text == sample.truth;
    const bool hr = is_human_readable(sample.readability);
    ++n_words;
    n_chars += sample.truth.size();
    edit_total += levenshtein(prediction.text, sample.truth);
    if (exact) ++n_exact;
    if (hr) {
        ++n_words_hr;
        if (exact) ++n_exact_hr;
    }
    for (double c : prediction.char_confidences) conf_sum += c;
    n_conf_chars += prediction.char_confidences.size();
}

EvalResult evaluate(std::span<const Prediction> predictions,
                    std::span<const WordSample* const> samples) {
    if (predictions.size() != samples.size())
        throw protocol_error("evaluate: prediction/sample count mismatch");
    if (samples.empty()) throw protocol_error("evaluate: empty sample list");
    EvalResult result;
    for (std::size_t i = 0; i < samples.size(); ++i) result.add(predictions[i], *samples[i]);
    return result;
}

std::map<UserId, EvalResult> per_user_eval(const Recognizer& model, const DatasetLedger& ledger,
                                           Role split, const std::vector<UserId>& user_filter) {
    if (split == Role::Train) throw protocol_error("per_user_eval expects Validation or Test");

    std::vector<UserId> users;
    if (user_filter.empty()) {
        for (const User& u : ledger.users()) users.push_back(u.user_id);
    } else {
        users = user_filter;
        std::sort(users.begin(), users.end());
    }

    std::map<UserId, EvalResult> out;
    for (UserId id : users) {
        const auto samples = split == Role::Validation ? ledger.validation_samples_of(id)
                                                       : ledger.test_samples_of(id);
        const auto predictions = predict_batch(model, samples);
        out[id] = evaluate(predictions, samples);
    }
    return out;
}

std::string per_user_csv(const std::map<UserId, EvalResult>& results, Role split, bool header) {
    std::ostringstream out;
    if (header) out << "user_id,split,n_words,n_words_hr,crr,wrr,wrr_hr,avg_conf\n";
    char buf[160];
    for (const auto& [user_id, r] : results) {
        std::snprintf(buf, sizeof(buf), "%u,%s,%llu,%llu,%.2f,%.2f,%.2f,%.4f\n", user_id,
                      to_string(split), static_cast<unsigned long long>(r.n_words),
                      static_cast<unsigned long long>(r.n_words_hr), r.crr(), r.wrr(), r.wrr_hr(),
                      r.avg_char_confidence());
        out << buf;
    }
    return out.str();
}

} // namespace hwrloop
