#include "hwrloop/types.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "hwrloop/errors.hpp"
#include "hwrloop/rng.hpp"

namespace hwrloop {

const char* to_string(Readability r) {
    switch (r) {
        case Readability::Readable: return "readable";
        case Readability::HardReadable: return "hard_readable";
        case Readability::NonReadable: return "non_readable";
    }
    return "?";
}

const char* to_string(Role r) {
    switch (r) {
        case Role::Train: return "train";
        case Role::Validation: return "validation";
        case Role::Test: return "test";
    }
    return "?";
}

Readability readability_from_string(const std::string& s) {
    if (s == "readable") return Readability::Readable;
    if (s == "hard_readable") return Readability::HardReadable;
    if (s == "non_readable") return Readability::NonReadable;
    throw protocol_error("unknown readability tag: " + s);
}

Role role_from_string(const std::string& s) {
    if (s == "train") return Role::Train;
    if (s == "validation") return Role::Validation;
    if (s == "test") return Role::Test;
    throw protocol_error("unknown role tag: " + s);
}

std::string format_float(float v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.9g", static_cast<double>(v));
    return std::string(buf);
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
}

void SeedSet::resolve() {
    std::uint64_t sm = master;
    const std::uint64_t d1 = splitmix64(sm), d2 = splitmix64(sm), d3 = splitmix64(sm),
                        d4 = splitmix64(sm), d5 = splitmix64(sm);
    if (vocabulary == 0) vocabulary = d1;
    if (prototypes == 0) prototypes = d2;
    if (styles == 0) styles = d3;
    if (pages == 0) pages = d4;
    if (train == 0) train = d5;
}

std::uint32_t ExperimentConfig::cohort_of(UserId user_id) const {
    for (std::uint32_t t = 0; t < growth_schedule.size(); ++t) {
        if (user_id <= growth_schedule[t]) return t + 1;
    }
    throw config_error("user id " + std::to_string(user_id) + " outside growth schedule");
}

// Default difficulty ramp: within each cohort, evenly spaced over
// [0.1, 0.9] so every iteration's candidate pool spans easy to hard.
static double ramp(std::uint32_t index, std::uint32_t count) {
    if (count <= 1) return 0.5;
    return 0.1 + 0.8 * static_cast<double>(index) / static_cast<double>(count - 1);
}

double ExperimentConfig::difficulty_of(UserId user_id) const {
    if (!user_difficulties.empty()) {
        if (user_id == 0 || user_id > user_difficulties.size())
            throw config_error("no difficulty configured for user " + std::to_string(user_id));
        return user_difficulties[user_id - 1];
    }
    const std::uint32_t cohort = cohort_of(user_id);
    const std::uint32_t lo = cohort == 1 ? 1 : growth_schedule[cohort - 2] + 1;
    const std::uint32_t hi = growth_schedule[cohort - 1];
    return ramp(user_id - lo, hi - lo + 1);
}

double ExperimentConfig::standard_difficulty_of(std::uint32_t writer_index) const {
    if (!standard_difficulties.empty()) {
        if (writer_index >= standard_difficulties.size())
            throw config_error("no difficulty configured for standard writer " +
                               std::to_string(writer_index));
        return standard_difficulties[writer_index];
    }
    // Near-canonical styles: the corpus the service already owns is easy.
    return 0.08 * static_cast<double>(writer_index % 4);
}

void ExperimentConfig::validate() const {
    if (growth_schedule.empty()) throw config_error("growth_schedule must not be empty");
    for (std::size_t i = 1; i < growth_schedule.size(); ++i) {
        if (growth_schedule[i] <= growth_schedule[i - 1])
            throw config_error("growth_schedule must be strictly increasing");
    }
    if (budget_m == 0) throw config_error("budget_m must be positive");
    for (std::uint32_t t = 1; t <= growth_schedule.size(); ++t) {
        // Pool at iteration t: users joined so far minus those already funded.
        const std::int64_t pool = static_cast<std::int64_t>(growth_schedule[t - 1]) -
                                  static_cast<std::int64_t>(budget_m) * (t - 1);
        if (pool < budget_m)
            throw config_error("budget_m infeasible at iteration " + std::to_string(t));
    }
    if (pages_per_user == 0 || words_per_page == 0)
        throw config_error("pages_per_user and words_per_page must be positive");
    if (alphabet_size < 2) throw config_error("alphabet_size must be at least 2");
    if (feature_dim == 0) throw config_error("feature_dim must be positive");
    if (max_word_len == 0) throw config_error("max_word_len must be positive");
    if (vocab_size == 0) throw config_error("vocab_size must be positive");
    if (standard_writers == 0 || standard_pages == 0)
        throw config_error("standard_writers and standard_pages must be positive");
    if (!user_difficulties.empty() && user_difficulties.size() != total_users())
        throw config_error("user_difficulties must list one value per user");
    if (!standard_difficulties.empty() && standard_difficulties.size() != standard_writers)
        throw config_error("standard_difficulties must list one value per standard writer");
    for (double d : user_difficulties)
        if (d < 0.0 || d > 1.0) throw config_error("difficulties must lie in [0,1]");
    for (double d : standard_difficulties)
        if (d < 0.0 || d > 1.0) throw config_error("difficulties must lie in [0,1]");
    if (style.noise_sigma_min < 0.0 || style.noise_sigma_span < 0.0)
        throw config_error("noise sigma parameters must be non-negative");
    if (style.corruption_max < 0.0 || style.hard_max < 0.0 ||
        style.corruption_max + style.hard_max > 1.0)
        throw config_error("corruption_max + hard_max must lie in [0,1]");
    if (prototype_min_separation <= 0.0)
        throw config_error("prototype_min_separation must be positive");
    if (prototype_min_separation <= 4.0 * (style.noise_sigma_min + style.noise_sigma_span))
        throw config_error("prototype_min_separation must exceed 4x the maximum noise sigma");
    if (initial_lr <= 0.0 || initial_lr > 1.0)
        throw config_error("initial_lr must lie in (0,1]");
    if (batch_size == 0) throw config_error("batch_size must be positive");
    if (early_stop_window == 0) throw config_error("early_stop_window must be positive");
    if (total_users() > standard_writer_base() - 1)
        throw config_error("growth schedule collides with standard writer id range");
}

namespace {

using json = nlohmann::json;

void require_keys(const json& j, const std::set<std::string>& allowed, const char* where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!allowed.count(it.key()))
            throw config_error(std::string("unknown key '") + it.key() + "' in " + where);
    }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw config_error(std::string("bad value for '") + key + "': " + e.what());
    }
}

} // namespace

ExperimentConfig config_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw config_error(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw config_error("config root must be a JSON object");

    require_keys(j, {"growth_schedule", "budget_m", "pages_per_user", "words_per_page",
                     "alphabet_size", "feature_dim", "max_word_len", "vocab_size",
                     "zipf_exponent", "standard_writers", "standard_pages",
                     "standard_difficulties", "user_difficulties", "style",
                     "prototype_min_separation", "seeds", "initial_lr",
                     "epochs_per_iteration", "batch_size", "optimizer_momentum",
                     "early_stop_min_delta", "early_stop_window",
                     "replay_resample_per_epoch", "confidence_temperature"},
                 "config");

    ExperimentConfig c;
    read(j, "growth_schedule", c.growth_schedule);
    read(j, "budget_m", c.budget_m);
    read(j, "pages_per_user", c.pages_per_user);
    read(j, "words_per_page", c.words_per_page);
    read(j, "alphabet_size", c.alphabet_size);
    read(j, "feature_dim", c.feature_dim);
    read(j, "max_word_len", c.max_word_len);
    read(j, "vocab_size", c.vocab_size);
    read(j, "zipf_exponent", c.zipf_exponent);
    read(j, "standard_writers", c.standard_writers);
    read(j, "standard_pages", c.standard_pages);
    read(j, "standard_difficulties", c.standard_difficulties);
    read(j, "user_difficulties", c.user_difficulties);
    read(j, "prototype_min_separation", c.prototype_min_separation);
    read(j, "initial_lr", c.initial_lr);
    read(j, "epochs_per_iteration", c.epochs_per_iteration);
    read(j, "batch_size", c.batch_size);
    read(j, "optimizer_momentum", c.optimizer_momentum);
    read(j, "early_stop_min_delta", c.early_stop_min_delta);
    read(j, "early_stop_window", c.early_stop_window);
    read(j, "replay_resample_per_epoch", c.replay_resample_per_epoch);
    read(j, "confidence_temperature", c.confidence_temperature);

    if (j.contains("style")) {
        const json& s = j.at("style");
        require_keys(s, {"noise_sigma_min", "noise_sigma_span", "corruption_max", "hard_max",
                         "offset_base", "offset_span", "scale_sigma_min", "scale_sigma_span"},
                     "style");
        read(s, "noise_sigma_min", c.style.noise_sigma_min);
        read(s, "noise_sigma_span", c.style.noise_sigma_span);
        read(s, "corruption_max", c.style.corruption_max);
        read(s, "hard_max", c.style.hard_max);
        read(s, "offset_base", c.style.offset_base);
        read(s, "offset_span", c.style.offset_span);
        read(s, "scale_sigma_min", c.style.scale_sigma_min);
        read(s, "scale_sigma_span", c.style.scale_sigma_span);
    }
    if (j.contains("seeds")) {
        const json& s = j.at("seeds");
        require_keys(s, {"master", "vocabulary", "prototypes", "styles", "pages", "train"},
                     "seeds");
        read(s, "master", c.seeds.master);
        read(s, "vocabulary", c.seeds.vocabulary);
        read(s, "prototypes", c.seeds.prototypes);
        read(s, "styles", c.seeds.styles);
        read(s, "pages", c.seeds.pages);
        read(s, "train", c.seeds.train);
    }

    c.seeds.resolve();
    c.validate();
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return config_from_json_text(ss.str());
}

std::string config_to_json_text(const ExperimentConfig& c) {
    nlohmann::ordered_json j;
    j["growth_schedule"] = c.growth_schedule;
    j["budget_m"] = c.budget_m;
    j["pages_per_user"] = c.pages_per_user;
    j["words_per_page"] = c.words_per_page;
    j["alphabet_size"] = c.alphabet_size;
    j["feature_dim"] = c.feature_dim;
    j["max_word_len"] = c.max_word_len;
    j["vocab_size"] = c.vocab_size;
    j["zipf_exponent"] = c.zipf_exponent;
    j["standard_writers"] = c.standard_writers;
    j["standard_pages"] = c.standard_pages;
    j["standard_difficulties"] = c.standard_difficulties;
    j["user_difficulties"] = c.user_difficulties;
    j["style"] = nlohmann::ordered_json{{"noise_sigma_min", c.style.noise_sigma_min},
                                        {"noise_sigma_span", c.style.noise_sigma_span},
                                        {"corruption_max", c.style.corruption_max},
                                        {"hard_max", c.style.hard_max},
                                        {"offset_base", c.style.offset_base},
                                        {"offset_span", c.style.offset_span},
                                        {"scale_sigma_min", c.style.scale_sigma_min},
                                        {"scale_sigma_span", c.style.scale_sigma_span}};
    j["prototype_min_separation"] = c.prototype_min_separation;
    j["seeds"] = nlohmann::ordered_json{{"master", c.seeds.master},
                                        {"vocabulary", c.seeds.vocabulary},
                                        {"prototypes", c.seeds.prototypes},
                                        {"styles", c.seeds.styles},
                                        {"pages", c.seeds.pages},
                                        {"train", c.seeds.train}};
    j["initial_lr"] = c.initial_lr;
    j["epochs_per_iteration"] = c.epochs_per_iteration;
    j["batch_size"] = c.batch_size;
    j["optimizer_momentum"] = c.optimizer_momentum;
    j["early_stop_min_delta"] = c.early_stop_min_delta;
    j["early_stop_window"] = c.early_stop_window;
    j["replay_resample_per_epoch"] = c.replay_resample_per_epoch;
    j["confidence_temperature"] = c.confidence_temperature;
    return j.dump(2) + "\n";
}

} // namespace hwrloop
