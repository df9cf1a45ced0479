#pragma once

#include <stdexcept>
#include <string>

namespace hwrloop {

// Bad config file, schema violation, or invalid parameter combination.
// The CLI maps this to exit code 2.
class config_error : public std::runtime_error {
public:
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

// Violation of the experiment protocol or its data contracts: role-count
// violations, budget infeasibility, manifest mismatch, non-readable samples
// reaching a training batch, and similar. The CLI maps this to exit code 3.
class protocol_error : public std::runtime_error {
public:
    explicit protocol_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace hwrloop
