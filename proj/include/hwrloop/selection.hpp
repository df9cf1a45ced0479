#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hwrloop/metrics.hpp"
#include "hwrloop/types.hpp"

namespace hwrloop {

// Budgeted user-selection policies. The service policy funds the candidates
// whose predictions on human-readable words are worst; the swap variants
// trade the best-scoring picks for the best-scoring leftovers.
struct SelectionPolicy {
    enum class Kind : std::uint8_t { WorstWrrHr, WorstWrr, Random, SwapBest };
    Kind kind = Kind::WorstWrrHr;
    std::uint64_t seed = 0;  // Random only
    std::uint32_t swap_k = 0; // SwapBest only, 1 or 2

    static SelectionPolicy worst_wrr_hr() { return {Kind::WorstWrrHr, 0, 0}; }
    static SelectionPolicy worst_wrr() { return {Kind::WorstWrr, 0, 0}; }
    static SelectionPolicy random(std::uint64_t seed) { return {Kind::Random, seed, 0}; }
    static SelectionPolicy swap_best(std::uint32_t k);

    std::string name() const;
};

// Picks m users from `candidates`, lowest score first, ties to the lower
// user id; the result is sorted by user id. Candidates with no
// human-readable words score 0 and stay eligible.
std::vector<UserId> select_users(const std::vector<UserId>& candidates,
                                 const std::map<UserId, EvalResult>& val_results, std::uint32_t m,
                                 const SelectionPolicy& policy);

// Replaces the k best-scoring members of `selected` with the k best-scoring
// non-selected candidates (ties to the lower user id).
std::vector<UserId> apply_swap(const std::vector<UserId>& selected,
                               const std::vector<UserId>& candidates,
                               const std::map<UserId, EvalResult>& val_results, std::uint32_t k);

} // namespace hwrloop
