#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "hwrloop/types.hpp"

namespace hwrloop {

// Split accounting for the whole experiment. Generated data (truths,
// observations, page roles) is immutable after construction; the only
// mutable state is the selection bookkeeping, which the sequential protocol
// driver updates between the concurrent evaluation phases.
class DatasetLedger {
public:
    struct PageMeta {
        PageId page_id = 0;
        UserId user_id = 0;
        Role role = Role::Train;
        std::uint32_t iteration_tag = 0;
        std::size_t first_sample = 0;
        std::size_t sample_count = 0;
    };

    DatasetLedger() = default;

    // Validates role counts, id uniqueness, and per-sample shape invariants.
    // `pages` holds both protocol users' pages and the standard (iteration-0)
    // corpus, distinguished by iteration_tag 0. Throws protocol_error.
    static DatasetLedger build(const ExperimentConfig& config, std::vector<User> users,
                               std::vector<Page> pages);

    const ExperimentConfig& config() const { return config_; }
    const std::vector<User>& users() const { return users_; }
    const User& user(UserId id) const;
    bool empty() const { return samples_.empty(); }

    const std::vector<WordSample>& samples() const { return samples_; }
    const std::vector<PageMeta>& pages() const { return pages_; }
    const WordSample& sample(SampleId id) const;

    std::vector<const WordSample*> page_samples(const PageMeta& page) const;
    std::vector<const WordSample*> test_samples() const; // fixed full test set
    std::vector<const WordSample*> test_samples_of(UserId id) const;
    std::vector<const WordSample*> validation_samples_of(UserId id) const;
    std::vector<const WordSample*> train_samples_of(UserId id) const;
    std::vector<const WordSample*> standard_train() const;
    std::vector<const WordSample*> standard_holdout() const;

    // Users whose validation page is live at iteration t (joined_iteration <= t).
    std::vector<UserId> validation_users(std::uint32_t iteration) const;
    // Users eligible for selection at iteration t: joined and never selected.
    std::vector<UserId> candidates(std::uint32_t iteration) const;

    // Records the funded users of iteration t and re-stamps their train
    // samples with the collection iteration. Enforces the selected-once rule.
    void record_selection(std::uint32_t iteration, const std::vector<UserId>& selected);
    const std::map<std::uint32_t, std::vector<UserId>>& selected_by_iteration() const {
        return selected_;
    }
    bool ever_selected(UserId id) const { return selected_set_.count(id) > 0; }

    // Human-readable training pool collected at `source_iteration`
    // (0 = standard corpus, t >= 1 = pages of the users funded at t).
    std::vector<const WordSample*> hr_train_pool(std::uint32_t source_iteration) const;

    // Digest over the canonical serialization of the test split.
    std::string test_digest() const;

private:
    void index_pages();

    ExperimentConfig config_;
    std::vector<User> users_;
    std::vector<WordSample> samples_; // ascending sample_id, contiguous per page
    std::vector<PageMeta> pages_;

    std::map<UserId, std::size_t> user_index_;
    std::map<UserId, std::size_t> validation_page_;  // user -> page index
    std::map<UserId, std::size_t> test_page_;        // user -> page index
    std::map<UserId, std::vector<std::size_t>> train_pages_;
    std::vector<std::size_t> standard_train_pages_;
    std::vector<std::size_t> standard_holdout_pages_;

    std::map<std::uint32_t, std::vector<UserId>> selected_;
    std::set<UserId> selected_set_;
};

// Partition of the protocol users into (ever selected, never selected),
// both sorted by user id.
std::pair<std::vector<UserId>, std::vector<UserId>> seen_unseen_split(
    const DatasetLedger& ledger,
    const std::map<std::uint32_t, std::vector<UserId>>& final_selected);

} // namespace hwrloop
