#include "hwrloop/ledger.hpp"

#include <algorithm>

#include "hwrloop/dataset_io.hpp"
#include "hwrloop/digest.hpp"
#include "hwrloop/errors.hpp"

namespace hwrloop {

namespace {

void validate_sample(const WordSample& s, const ExperimentConfig& config) {
    if (s.truth.empty() || s.truth.size() > config.max_word_len)
        throw protocol_error("sample " + std::to_string(s.sample_id) +
                             ": word length outside [1, max_word_len]");
    if (s.observations.size() != s.truth.size() * config.feature_dim)
        throw protocol_error("sample " + std::to_string(s.sample_id) +
                             ": observation shape does not match truth length");
    for (Symbol c : s.truth) {
        if (c >= config.alphabet_size)
            throw protocol_error("sample " + std::to_string(s.sample_id) +
                                 ": symbol id outside alphabet");
    }
}

} // namespace

DatasetLedger DatasetLedger::build(const ExperimentConfig& config, std::vector<User> users,
                                   std::vector<Page> pages) {
    DatasetLedger ledger;
    ledger.config_ = config;

    std::sort(users.begin(), users.end(),
              [](const User& a, const User& b) { return a.user_id < b.user_id; });
    for (std::size_t i = 0; i + 1 < users.size(); ++i) {
        if (users[i].user_id == users[i + 1].user_id)
            throw protocol_error("duplicate user_id " + std::to_string(users[i].user_id));
    }
    for (const User& u : users) {
        if (u.joined_iteration < 1 || u.joined_iteration > config.iterations())
            throw protocol_error("user " + std::to_string(u.user_id) +
                                 ": joined_iteration outside growth schedule");
        if (u.user_id >= config.standard_writer_base())
            throw protocol_error("user " + std::to_string(u.user_id) +
                                 ": id collides with standard writer range");
    }
    ledger.users_ = std::move(users);

    std::sort(pages.begin(), pages.end(),
              [](const Page& a, const Page& b) { return a.page_id < b.page_id; });
    for (std::size_t i = 0; i + 1 < pages.size(); ++i) {
        if (pages[i].page_id == pages[i + 1].page_id)
            throw protocol_error("duplicate page_id " + std::to_string(pages[i].page_id));
    }

    std::size_t total = 0;
    for (const Page& p : pages) total += p.samples.size();
    ledger.samples_.reserve(total);
    ledger.pages_.reserve(pages.size());

    for (Page& p : pages) {
        PageMeta meta;
        meta.page_id = p.page_id;
        meta.user_id = p.user_id;
        meta.role = p.role;
        meta.iteration_tag = p.iteration_tag;
        meta.first_sample = ledger.samples_.size();
        meta.sample_count = p.samples.size();
        for (WordSample& s : p.samples) {
            validate_sample(s, config);
            if (s.page_id != p.page_id || s.user_id != p.user_id || s.role != p.role ||
                s.iteration_tag != p.iteration_tag)
                throw protocol_error("sample " + std::to_string(s.sample_id) +
                                     " disagrees with its page metadata");
            ledger.samples_.push_back(std::move(s));
        }
        ledger.pages_.push_back(meta);
    }

    // Sample ids must be globally unique; they are the split-disjointness key.
    std::vector<SampleId> ids;
    ids.reserve(ledger.samples_.size());
    for (const WordSample& s : ledger.samples_) ids.push_back(s.sample_id);
    std::vector<SampleId> sorted_ids = ids;
    std::sort(sorted_ids.begin(), sorted_ids.end());
    if (std::adjacent_find(sorted_ids.begin(), sorted_ids.end()) != sorted_ids.end())
        throw protocol_error("duplicate sample_id in dataset");
    if (!std::is_sorted(ids.begin(), ids.end()))
        throw protocol_error("sample ids must ascend in page order");

    ledger.index_pages();
    return ledger;
}

void DatasetLedger::index_pages() {
    for (std::size_t i = 0; i < users_.size(); ++i) user_index_[users_[i].user_id] = i;

    for (std::size_t i = 0; i < pages_.size(); ++i) {
        const PageMeta& p = pages_[i];
        const bool standard = p.iteration_tag == 0;
        if (standard) {
            if (p.user_id < config_.standard_writer_base())
                throw protocol_error("page " + std::to_string(p.page_id) +
                                     ": iteration 0 page from a protocol user");
            if (p.role == Role::Train)
                standard_train_pages_.push_back(i);
            else if (p.role == Role::Test)
                standard_holdout_pages_.push_back(i);
            else
                throw protocol_error("page " + std::to_string(p.page_id) +
                                     ": standard corpus has no validation split");
            continue;
        }
        if (!user_index_.count(p.user_id))
            throw protocol_error("page " + std::to_string(p.page_id) + ": unknown user " +
                                 std::to_string(p.user_id));
        switch (p.role) {
            case Role::Validation:
                if (validation_page_.count(p.user_id))
                    throw protocol_error("role count violation: user " +
                                         std::to_string(p.user_id) +
                                         " has two validation pages");
                validation_page_[p.user_id] = i;
                break;
            case Role::Test:
                if (test_page_.count(p.user_id))
                    throw protocol_error("role count violation: user " +
                                         std::to_string(p.user_id) + " has two test pages");
                test_page_[p.user_id] = i;
                break;
            case Role::Train:
                train_pages_[p.user_id].push_back(i);
                break;
        }
    }

    for (const User& u : users_) {
        if (!validation_page_.count(u.user_id))
            throw protocol_error("missing validation page for user " + std::to_string(u.user_id));
        if (!test_page_.count(u.user_id))
            throw protocol_error("missing test page for user " + std::to_string(u.user_id));
        const auto it = train_pages_.find(u.user_id);
        const std::size_t n_train = it == train_pages_.end() ? 0 : it->second.size();
        if (n_train != 0 && n_train != config_.pages_per_user)
            throw protocol_error("role count violation: user " + std::to_string(u.user_id) +
                                 " has " + std::to_string(n_train) + " train pages, expected " +
                                 std::to_string(config_.pages_per_user));
        const std::uint32_t expected_cohort = config_.cohort_of(u.user_id);
        if (u.joined_iteration != expected_cohort)
            throw protocol_error("user " + std::to_string(u.user_id) +
                                 ": joined_iteration inconsistent with growth schedule");
    }
}

const User& DatasetLedger::user(UserId id) const {
    const auto it = user_index_.find(id);
    if (it == user_index_.end()) throw protocol_error("unknown user " + std::to_string(id));
    return users_[it->second];
}

const WordSample& DatasetLedger::sample(SampleId id) const {
    const auto it = std::lower_bound(
        samples_.begin(), samples_.end(), id,
        [](const WordSample& s, SampleId v) { return s.sample_id < v; });
    if (it == samples_.end() || it->sample_id != id)
        throw protocol_error("unknown sample " + std::to_string(id));
    return *it;
}

std::vector<const WordSample*> DatasetLedger::page_samples(const PageMeta& page) const {
    std::vector<const WordSample*> out;
    out.reserve(page.sample_count);
    for (std::size_t i = 0; i < page.sample_count; ++i)
        out.push_back(&samples_[page.first_sample + i]);
    return out;
}

std::vector<const WordSample*> DatasetLedger::test_samples() const {
    std::vector<const WordSample*> out;
    for (const auto& [user_id, page_idx] : test_page_) {
        for (std::size_t i = 0; i < pages_[page_idx].sample_count; ++i)
            out.push_back(&samples_[pages_[page_idx].first_sample + i]);
    }
    return out;
}

std::vector<const WordSample*> DatasetLedger::test_samples_of(UserId id) const {
    const auto it = test_page_.find(id);
    if (it == test_page_.end())
        throw protocol_error("missing test page for user " + std::to_string(id));
    return page_samples(pages_[it->second]);
}

std::vector<const WordSample*> DatasetLedger::validation_samples_of(UserId id) const {
    const auto it = validation_page_.find(id);
    if (it == validation_page_.end())
        throw protocol_error("missing validation page for user " + std::to_string(id));
    return page_samples(pages_[it->second]);
}

std::vector<const WordSample*> DatasetLedger::train_samples_of(UserId id) const {
    std::vector<const WordSample*> out;
    const auto it = train_pages_.find(id);
    if (it == train_pages_.end()) return out;
    for (std::size_t page_idx : it->second) {
        for (std::size_t i = 0; i < pages_[page_idx].sample_count; ++i)
            out.push_back(&samples_[pages_[page_idx].first_sample + i]);
    }
    return out;
}

std::vector<const WordSample*> DatasetLedger::standard_train() const {
    std::vector<const WordSample*> out;
    for (std::size_t page_idx : standard_train_pages_) {
        for (std::size_t i = 0; i < pages_[page_idx].sample_count; ++i)
            out.push_back(&samples_[pages_[page_idx].first_sample + i]);
    }
    return out;
}

std::vector<const WordSample*> DatasetLedger::standard_holdout() const {
    std::vector<const WordSample*> out;
    for (std::size_t page_idx : standard_holdout_pages_) {
        for (std::size_t i = 0; i < pages_[page_idx].sample_count; ++i)
            out.push_back(&samples_[pages_[page_idx].first_sample + i]);
    }
    return out;
}

std::vector<UserId> DatasetLedger::validation_users(std::uint32_t iteration) const {
    std::vector<UserId> out;
    for (const User& u : users_) {
        if (u.joined_iteration <= iteration) out.push_back(u.user_id);
    }
    return out;
}

std::vector<UserId> DatasetLedger::candidates(std::uint32_t iteration) const {
    std::vector<UserId> out;
    for (const User& u : users_) {
        if (u.joined_iteration <= iteration && !selected_set_.count(u.user_id))
            out.push_back(u.user_id);
    }
    return out;
}

void DatasetLedger::record_selection(std::uint32_t iteration,
                                     const std::vector<UserId>& selected) {
    if (iteration == 0) throw protocol_error("iteration 0 has no selection");
    if (selected_.count(iteration))
        throw protocol_error("selection already recorded for iteration " +
                             std::to_string(iteration));
    for (UserId id : selected) {
        const User& u = user(id);
        if (u.joined_iteration > iteration)
            throw protocol_error("user " + std::to_string(id) + " not yet available at iteration " +
                                 std::to_string(iteration));
        if (selected_set_.count(id))
            throw protocol_error("user " + std::to_string(id) +
                                 " already selected in an earlier iteration");
    }
    std::vector<UserId> sorted = selected;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw protocol_error("duplicate user in selection");

    for (UserId id : sorted) {
        selected_set_.insert(id);
        const auto it = train_pages_.find(id);
        if (it == train_pages_.end() || it->second.empty())
            throw protocol_error("selected user " + std::to_string(id) + " has no train pages");
        // The user's pages are collected now, so they belong to this iteration.
        for (std::size_t page_idx : it->second) {
            pages_[page_idx].iteration_tag = iteration;
            for (std::size_t i = 0; i < pages_[page_idx].sample_count; ++i)
                samples_[pages_[page_idx].first_sample + i].iteration_tag = iteration;
        }
    }
    selected_[iteration] = sorted;
}

std::vector<const WordSample*> DatasetLedger::hr_train_pool(std::uint32_t source_iteration) const {
    std::vector<const WordSample*> out;
    if (source_iteration == 0) {
        for (const WordSample* s : standard_train())
            if (is_human_readable(s->readability)) out.push_back(s);
        return out;
    }
    const auto it = selected_.find(source_iteration);
    if (it == selected_.end())
        throw protocol_error("no selection recorded for iteration " +
                             std::to_string(source_iteration));
    for (UserId id : it->second) {
        for (const WordSample* s : train_samples_of(id))
            if (is_human_readable(s->readability)) out.push_back(s);
    }
    return out;
}

std::string DatasetLedger::test_digest() const {
    Digest d;
    for (const WordSample* s : test_samples()) d.update(serialize_sample(*s));
    return d.hex();
}

std::pair<std::vector<UserId>, std::vector<UserId>> seen_unseen_split(
    const DatasetLedger& ledger,
    const std::map<std::uint32_t, std::vector<UserId>>& final_selected) {
    std::set<UserId> seen;
    for (const auto& [iteration, users] : final_selected)
        for (UserId id : users) seen.insert(id);
    std::vector<UserId> seen_out, unseen_out;
    for (const User& u : ledger.users()) {
        if (seen.count(u.user_id))
            seen_out.push_back(u.user_id);
        else
            unseen_out.push_back(u.user_id);
    }
    return {seen_out, unseen_out};
}

} // namespace hwrloop
