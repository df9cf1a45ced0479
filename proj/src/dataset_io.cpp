#include "hwrloop/dataset_io.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "hwrloop/digest.hpp"
#include "hwrloop/errors.hpp"
#include "hwrloop/textgen.hpp"

namespace hwrloop {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string serialize_sample(const WordSample& s) {
    std::ostringstream out;
    out << "{\"sample_id\":" << s.sample_id << ",\"user_id\":" << s.user_id
        << ",\"page_id\":" << s.page_id << ",\"role\":\"" << to_string(s.role)
        << "\",\"iteration_tag\":" << s.iteration_tag << ",\"readability\":\""
        << to_string(s.readability) << "\",\"truth\":[";
    for (std::size_t i = 0; i < s.truth.size(); ++i) {
        if (i) out << ',';
        out << s.truth[i];
    }
    out << "],\"observations\":[";
    const std::size_t dim = s.truth.empty() ? 0 : s.observations.size() / s.truth.size();
    for (std::size_t i = 0; i < s.truth.size(); ++i) {
        if (i) out << ',';
        out << '[';
        for (std::size_t d = 0; d < dim; ++d) {
            if (d) out << ',';
            out << format_float(s.observations[i * dim + d]);
        }
        out << ']';
    }
    out << "]}\n";
    return out.str();
}

WordSample parse_sample(const std::string& line) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::exception& e) {
        throw protocol_error(std::string("malformed dataset row: ") + e.what());
    }
    try {
        WordSample s;
        s.sample_id = j.at("sample_id").get<SampleId>();
        s.user_id = j.at("user_id").get<UserId>();
        s.page_id = j.at("page_id").get<PageId>();
        s.role = role_from_string(j.at("role").get<std::string>());
        s.iteration_tag = j.at("iteration_tag").get<std::uint32_t>();
        s.readability = readability_from_string(j.at("readability").get<std::string>());
        for (const auto& v : j.at("truth")) s.truth.push_back(v.get<Symbol>());
        for (const auto& row : j.at("observations"))
            for (const auto& v : row) s.observations.push_back(v.get<float>());
        return s;
    } catch (const json::exception& e) {
        throw protocol_error(std::string("malformed dataset row: ") + e.what());
    }
}

void write_ledger_jsonl(const std::string& path, const DatasetLedger& ledger) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw protocol_error("cannot write " + path);
    for (const WordSample& s : ledger.samples()) out << serialize_sample(s);
}

std::vector<WordSample> read_samples_jsonl(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw protocol_error("cannot open " + path);
    std::vector<WordSample> samples;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        samples.push_back(parse_sample(line));
    }
    return samples;
}

namespace {

using ojson = nlohmann::ordered_json;

ojson style_to_json(const WritingStyle& s) {
    ojson j;
    ojson offset = ojson::array();
    for (double v : s.offset) offset.push_back(v);
    j["offset"] = offset;
    j["scale"] = s.scale;
    j["noise_sigma"] = s.noise_sigma;
    j["corruption_rate"] = s.corruption_rate;
    j["hard_rate"] = s.hard_rate;
    return j;
}

WritingStyle style_from_json(const json& j) {
    WritingStyle s;
    for (const auto& v : j.at("offset")) s.offset.push_back(v.get<double>());
    s.scale = j.at("scale").get<double>();
    s.noise_sigma = j.at("noise_sigma").get<double>();
    s.corruption_rate = j.at("corruption_rate").get<double>();
    s.hard_rate = j.at("hard_rate").get<double>();
    return s;
}

ojson user_to_json(const User& u) {
    ojson j;
    j["user_id"] = u.user_id;
    j["joined_iteration"] = u.joined_iteration;
    j["difficulty"] = u.difficulty;
    j["style"] = style_to_json(u.style);
    return j;
}

User user_from_json(const json& j) {
    User u;
    u.user_id = j.at("user_id").get<UserId>();
    u.joined_iteration = j.at("joined_iteration").get<std::uint32_t>();
    u.difficulty = j.at("difficulty").get<double>();
    u.style = style_from_json(j.at("style"));
    return u;
}

} // namespace

std::string ManifestWriter::to_json() const {
    ojson j;
    j["format_version"] = 1;
    j["dataset_digest"] = dataset_digest;
    j["counts"] = ojson{{"samples", n_samples}, {"pages", n_pages}};
    j["config"] = ojson::parse(config_to_json_text(*config));
    ojson users_json = ojson::array();
    for (const User& u : *users) users_json.push_back(user_to_json(u));
    j["users"] = users_json;
    ojson writers_json = ojson::array();
    for (const User& u : *standard_writers) writers_json.push_back(user_to_json(u));
    j["standard_writers"] = writers_json;
    return j.dump(2) + "\n";
}

Manifest parse_manifest(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw protocol_error(std::string("manifest is not valid JSON: ") + e.what());
    }
    try {
        Manifest m;
        m.config = config_from_json_text(j.at("config").dump());
        m.dataset_digest = j.at("dataset_digest").get<std::string>();
        for (const auto& u : j.at("users")) m.users.push_back(user_from_json(u));
        for (const auto& u : j.at("standard_writers"))
            m.standard_writers.push_back(user_from_json(u));
        return m;
    } catch (const json::exception& e) {
        throw protocol_error(std::string("malformed manifest: ") + e.what());
    }
}

Manifest load_manifest(const std::string& path) { return parse_manifest(read_file(path)); }

LoadedDataset load_dataset(const std::string& dir) {
    const fs::path base(dir);
    LoadedDataset out;
    out.manifest = load_manifest((base / "manifest.json").string());

    const std::string ledger_bytes = read_file((base / "ledger.jsonl").string());
    if (digest_hex(ledger_bytes) != out.manifest.dataset_digest)
        throw protocol_error("dataset digest mismatch in " + dir);

    std::vector<WordSample> samples;
    std::istringstream in(ledger_bytes);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) samples.push_back(parse_sample(line));
    }

    // Regroup flat rows into pages; rows of one page are contiguous.
    std::vector<Page> pages;
    for (WordSample& s : samples) {
        if (pages.empty() || pages.back().page_id != s.page_id) {
            Page p;
            p.page_id = s.page_id;
            p.user_id = s.user_id;
            p.role = s.role;
            p.iteration_tag = s.iteration_tag;
            pages.push_back(std::move(p));
        }
        pages.back().samples.push_back(std::move(s));
    }

    out.ledger = DatasetLedger::build(out.manifest.config, out.manifest.users, std::move(pages));
    return out;
}

LoadedDataset make_dataset(const ExperimentConfig& config, Exec exec) {
    GeneratedWorld world = generate_world(config, exec);
    LoadedDataset out;
    out.manifest.config = config;
    out.manifest.users = world.users;
    out.manifest.standard_writers = world.standard_writers;
    out.ledger = DatasetLedger::build(config, std::move(world.users), std::move(world.pages));

    Digest d;
    for (const WordSample& s : out.ledger.samples()) d.update(serialize_sample(s));
    out.manifest.dataset_digest = d.hex();
    return out;
}

void save_dataset(const LoadedDataset& dataset, const std::string& dir) {
    fs::create_directories(dir);
    const fs::path base(dir);
    write_ledger_jsonl((base / "ledger.jsonl").string(), dataset.ledger);

    ManifestWriter mw;
    mw.config = &dataset.manifest.config;
    mw.users = &dataset.manifest.users;
    mw.standard_writers = &dataset.manifest.standard_writers;
    mw.dataset_digest = dataset.manifest.dataset_digest;
    mw.n_samples = dataset.ledger.samples().size();
    mw.n_pages = dataset.ledger.pages().size();
    write_file((base / "manifest.json").string(), mw.to_json());
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw protocol_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw protocol_error("cannot write " + path);
    out << content;
}

} // namespace hwrloop
