#include "hwrloop/selection.hpp"

#include <algorithm>
#include <set>

#include "hwrloop/errors.hpp"
#include "hwrloop/rng.hpp"

namespace hwrloop {

SelectionPolicy SelectionPolicy::swap_best(std::uint32_t k) {
    if (k < 1 || k > 2) throw config_error("swap policy supports k in {1,2}");
    return {Kind::SwapBest, 0, k};
}

std::string SelectionPolicy::name() const {
    switch (kind) {
        case Kind::WorstWrrHr: return "worst_wrr_hr";
        case Kind::WorstWrr: return "worst_wrr";
        case Kind::Random: return "random";
        case Kind::SwapBest: return "swap_best_" + std::to_string(swap_k);
    }
    return "?";
}

namespace {

double score_of(const std::map<UserId, EvalResult>& val_results, UserId id, bool hr_only) {
    const auto it = val_results.find(id);
    if (it == val_results.end())
        throw protocol_error("missing evaluation for candidate " + std::to_string(id));
    return hr_only ? it->second.wrr_hr() : it->second.wrr();
}

std::vector<UserId> pick_worst(const std::vector<UserId>& candidates,
                               const std::map<UserId, EvalResult>& val_results, std::uint32_t m,
                               bool hr_only) {
    std::vector<UserId> order = candidates;
    std::sort(order.begin(), order.end(), [&](UserId a, UserId b) {
        const double sa = score_of(val_results, a, hr_only);
        const double sb = score_of(val_results, b, hr_only);
        if (sa != sb) return sa < sb;
        return a < b;
    });
    order.resize(m);
    std::sort(order.begin(), order.end());
    return order;
}

} // namespace

std::vector<UserId> select_users(const std::vector<UserId>& candidates,
                                 const std::map<UserId, EvalResult>& val_results, std::uint32_t m,
                                 const SelectionPolicy& policy) {
    std::set<UserId> unique(candidates.begin(), candidates.end());
    if (unique.size() != candidates.size())
        throw protocol_error("duplicate user in candidate pool");
    if (m > candidates.size())
        throw protocol_error("budget " + std::to_string(m) + " exceeds candidate pool of " +
                             std::to_string(candidates.size()));
    for (UserId id : candidates) score_of(val_results, id, true); // all must be evaluated

    switch (policy.kind) {
        case SelectionPolicy::Kind::WorstWrrHr:
            return pick_worst(candidates, val_results, m, true);
        case SelectionPolicy::Kind::WorstWrr:
            return pick_worst(candidates, val_results, m, false);
        case SelectionPolicy::Kind::Random: {
            std::vector<UserId> order(unique.begin(), unique.end());
            Rng rng(policy.seed);
            rng.shuffle(order);
            order.resize(m);
            std::sort(order.begin(), order.end());
            return order;
        }
        case SelectionPolicy::Kind::SwapBest: {
            const auto base = pick_worst(candidates, val_results, m, true);
            return apply_swap(base, candidates, val_results, policy.swap_k);
        }
    }
    throw protocol_error("unknown selection policy");
}

std::vector<UserId> apply_swap(const std::vector<UserId>& selected,
                               const std::vector<UserId>& candidates,
                               const std::map<UserId, EvalResult>& val_results, std::uint32_t k) {
    if (k == 0) return selected;
    if (k > selected.size())
        throw protocol_error("swap count exceeds selected set size");

    const std::set<UserId> selected_set(selected.begin(), selected.end());
    std::vector<UserId> rest;
    for (UserId id : candidates)
        if (!selected_set.count(id)) rest.push_back(id);
    if (rest.size() < k)
        throw protocol_error("swap needs " + std::to_string(k) +
                             " non-selected candidates, have " + std::to_string(rest.size()));

    const auto by_score_desc = [&](UserId a, UserId b) {
        const double sa = score_of(val_results, a, true);
        const double sb = score_of(val_results, b, true);
        if (sa != sb) return sa > sb;
        return a < b;
    };

    std::vector<UserId> drop = selected;
    std::sort(drop.begin(), drop.end(), by_score_desc);
    drop.resize(k);
    std::sort(rest.begin(), rest.end(), by_score_desc);
    rest.resize(k);

    std::vector<UserId> out;
    for (UserId id : selected)
        if (std::find(drop.begin(), drop.end(), id) == drop.end()) out.push_back(id);
    out.insert(out.end(), rest.begin(), rest.end());
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace hwrloop
