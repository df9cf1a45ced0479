#include "hwrloop/harness.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <set>

#include <json.hpp>

#include "hwrloop/digest.hpp"
#include "hwrloop/errors.hpp"
#include "hwrloop/kernels.hpp"

namespace hwrloop {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

const char* to_string(Variant v) {
    switch (v) {
        case Variant::Iter1FT: return "Iter1FT";
        case Variant::Iter1CL: return "Iter1CL";
        case Variant::IterTCLm: return "IterTCLm";
        case Variant::SwapS1: return "SwapS1";
        case Variant::SwapS2: return "SwapS2";
        case Variant::WorstWrrAblation: return "WorstWrrAblation";
        case Variant::RandomAblation: return "RandomAblation";
    }
    return "?";
}

Variant variant_from_string(const std::string& s) {
    if (s == "Iter1FT") return Variant::Iter1FT;
    if (s == "Iter1CL") return Variant::Iter1CL;
    if (s == "IterTCLm") return Variant::IterTCLm;
    if (s == "SwapS1") return Variant::SwapS1;
    if (s == "SwapS2") return Variant::SwapS2;
    if (s == "WorstWrrAblation") return Variant::WorstWrrAblation;
    if (s == "RandomAblation") return Variant::RandomAblation;
    throw config_error("unknown variant: " + s);
}

std::uint32_t variant_iterations(Variant v, const ExperimentConfig& config) {
    switch (v) {
        case Variant::Iter1FT:
        case Variant::Iter1CL:
            return 1;
        default:
            return config.iterations();
    }
}

std::string model_label(Variant v, std::uint32_t iteration) {
    if (iteration == 1) return v == Variant::Iter1FT ? "Iter1FT" : "Iter1CL";
    const std::string base = "Iter" + std::to_string(iteration) + "CLm";
    switch (v) {
        case Variant::SwapS1: return iteration == 2 ? base + "S1" : base;
        case Variant::SwapS2: return iteration == 2 ? base + "S2" : base;
        case Variant::WorstWrrAblation: return base + "Wrr";
        case Variant::RandomAblation: return base + "Rand";
        default: return base;
    }
}

namespace {

ojson eval_result_json(const EvalResult& r) {
    ojson j;
    j["n_words"] = r.n_words;
    j["n_words_hr"] = r.n_words_hr;
    j["n_chars"] = r.n_chars;
    j["n_exact"] = r.n_exact;
    j["n_exact_hr"] = r.n_exact_hr;
    j["edit_total"] = r.edit_total;
    j["conf_sum"] = r.conf_sum;
    j["n_conf_chars"] = r.n_conf_chars;
    j["crr"] = r.crr();
    j["wrr"] = r.wrr();
    j["wrr_hr"] = r.wrr_hr();
    j["avg_conf"] = r.avg_char_confidence();
    return j;
}

EvalResult eval_result_from_json(const nlohmann::json& j) {
    EvalResult r;
    r.n_words = j.at("n_words").get<std::uint64_t>();
    r.n_words_hr = j.at("n_words_hr").get<std::uint64_t>();
    r.n_chars = j.at("n_chars").get<std::uint64_t>();
    r.n_exact = j.at("n_exact").get<std::uint64_t>();
    r.n_exact_hr = j.at("n_exact_hr").get<std::uint64_t>();
    r.edit_total = j.at("edit_total").get<std::uint64_t>();
    r.conf_sum = j.at("conf_sum").get<double>();
    r.n_conf_chars = j.at("n_conf_chars").get<std::uint64_t>();
    return r;
}

void log_event(RunState& state, std::uint32_t iteration, const char* event, ojson fields) {
    ojson j;
    j["iteration"] = iteration;
    j["event"] = event;
    for (auto& [k, v] : fields.items()) j[k] = v;
    state.log << j.dump() << "\n";
}

EvalResult merge_users(const std::map<UserId, EvalResult>& per_user,
                       const std::vector<UserId>& users) {
    EvalResult out;
    for (UserId id : users) {
        const auto it = per_user.find(id);
        if (it != per_user.end()) out.merge(it->second);
    }
    return out;
}

} // namespace

IterationReport run_iteration(RunState& state, std::uint32_t iteration,
                              const SelectionPolicy& policy, const ExperimentConfig& config) {
    IterationReport report;
    report.iteration = iteration;
    DatasetLedger& ledger = state.ledger;
    Recognizer& model = *state.model;

    if (iteration == 1) {
        // Base case: the initial cohort is funded outright, no validation pass.
        report.policy = "initial_cohort";
        for (const User& u : ledger.users())
            if (u.joined_iteration == 1) report.selected.push_back(u.user_id);
        if (report.selected.size() < config.budget_m)
            throw protocol_error("initial cohort smaller than budget");
        log_event(state, iteration, "select",
                  {{"policy", report.policy}, {"selected", report.selected}});
    } else {
        const std::vector<UserId> pool = ledger.candidates(iteration);
        if (pool.size() < config.budget_m)
            throw protocol_error("budget infeasible at iteration " + std::to_string(iteration) +
                                 ": " + std::to_string(pool.size()) + " candidates");
        const auto val_results = per_user_eval(model, ledger, Role::Validation, pool);
        ojson eval_scores = ojson::array();
        for (const auto& [id, r] : val_results) {
            report.candidates.push_back({id, r});
            ojson e;
            e["user_id"] = id;
            e["wrr"] = r.wrr();
            e["wrr_hr"] = r.wrr_hr();
            if (r.n_words_hr == 0) e["zero_hr"] = true;
            eval_scores.push_back(e);
        }
        log_event(state, iteration, "evaluate",
                  {{"model_version", model.version()}, {"candidates", eval_scores}});

        report.policy = policy.name();
        report.selected = select_users(pool, val_results, config.budget_m, policy);
        log_event(state, iteration, "select",
                  {{"policy", report.policy}, {"selected", report.selected}});
    }

    ledger.record_selection(iteration, report.selected);
    std::size_t collected = 0, dropped = 0;
    for (UserId id : report.selected) {
        for (const WordSample* s : ledger.train_samples_of(id)) {
            ++collected;
            if (!is_human_readable(s->readability)) ++dropped;
        }
    }
    log_event(state, iteration, "collect",
              {{"users", report.selected},
               {"pages", report.selected.size() * config.pages_per_user},
               {"samples", collected}});
    log_event(state, iteration, "filter",
              {{"kept", collected - dropped}, {"dropped_non_readable", dropped}});

    report.schedule =
        state.fine_tune
            ? build_fine_tune_schedule(ledger, iteration, report.selected, state.rng, config)
            : build_curriculum(ledger, iteration, report.selected, state.rng, config);
    ojson replay_counts;
    for (const auto& [source, ids] : report.schedule.replay_samples)
        replay_counts[std::to_string(source)] = ids.size();
    log_event(state, iteration, "schedule",
              {{"current", report.schedule.current_samples.size()},
               {"replay", replay_counts},
               {"with_replacement", report.schedule.replay_with_replacement},
               {"digest", report.schedule.digest()}});

    report.train_log = train_with_curriculum(model, ledger, report.schedule, config);
    report.checkpoint_digest = digest_hex(model.checkpoint_json());
    log_event(state, iteration, "train",
              {{"epochs", report.train_log.epochs.size()},
               {"final_train_crr",
                report.train_log.epochs.empty() ? 0.0 : report.train_log.epochs.back().train_crr},
               {"checkpoint_digest", report.checkpoint_digest}});

    report.test_digest = ledger.test_digest();
    report.per_user_test = per_user_eval(model, ledger, Role::Test);
    std::vector<UserId> seen, unseen;
    for (const User& u : ledger.users())
        (ledger.ever_selected(u.user_id) ? seen : unseen).push_back(u.user_id);
    report.aggregate_test = merge_users(report.per_user_test, [&] {
        std::vector<UserId> all;
        for (const User& u : ledger.users()) all.push_back(u.user_id);
        return all;
    }());
    report.seen_test = merge_users(report.per_user_test, seen);
    report.unseen_test = merge_users(report.per_user_test, unseen);

    const auto holdout = ledger.standard_holdout();
    if (!holdout.empty())
        report.standard_holdout = evaluate(predict_batch(model, holdout), holdout);

    for (const auto& [id, r] : report.per_user_test)
        report.confidence_crr.push_back({id, r.avg_char_confidence(), r.crr()});

    log_event(state, iteration, "test",
              {{"test_digest", report.test_digest},
               {"crr", report.aggregate_test.crr()},
               {"wrr", report.aggregate_test.wrr()}});
    return report;
}

std::string IterationReport::to_json() const {
    ojson j;
    j["iteration"] = iteration;
    j["policy"] = policy;
    ojson cand = ojson::array();
    for (const CandidateScore& c : candidates) {
        ojson e;
        e["user_id"] = c.user_id;
        e["scores"] = eval_result_json(c.result);
        if (c.result.n_words_hr == 0) e["zero_hr"] = true;
        cand.push_back(e);
    }
    j["candidates"] = cand;
    j["selected"] = selected;

    ojson sched;
    sched["current_count"] = schedule.current_samples.size();
    ojson replay_counts;
    ojson replay_ids;
    for (const auto& [source, ids] : schedule.replay_samples) {
        replay_counts[std::to_string(source)] = ids.size();
        replay_ids[std::to_string(source)] = ids;
    }
    sched["replay_counts"] = replay_counts;
    sched["replay_with_replacement"] = schedule.replay_with_replacement;
    sched["digest"] = schedule.digest();
    sched["current_ids"] = schedule.current_samples;
    sched["replay_ids"] = replay_ids;
    j["schedule"] = sched;

    j["train_log"] = ojson::parse(train_log.to_json());
    j["checkpoint_digest"] = checkpoint_digest;
    j["test_digest"] = test_digest;

    ojson per_user = ojson::array();
    for (const auto& [id, r] : per_user_test) {
        ojson e;
        e["user_id"] = id;
        e["scores"] = eval_result_json(r);
        per_user.push_back(e);
    }
    j["per_user_test"] = per_user;
    j["aggregate_test"] = eval_result_json(aggregate_test);
    j["seen_test"] = eval_result_json(seen_test);
    j["unseen_test"] = eval_result_json(unseen_test);
    j["standard_holdout"] = eval_result_json(standard_holdout);

    ojson conf = ojson::array();
    for (const ConfidencePoint& p : confidence_crr) {
        ojson e;
        e["user_id"] = p.user_id;
        e["avg_conf"] = p.avg_confidence;
        e["crr"] = p.crr;
        conf.push_back(e);
    }
    j["confidence_crr"] = conf;
    return j.dump(2) + "\n";
}

namespace {

SelectionPolicy policy_for(Variant v, std::uint32_t iteration, std::uint64_t run_seed) {
    switch (v) {
        case Variant::SwapS1:
            return iteration == 2 ? SelectionPolicy::swap_best(1)
                                  : SelectionPolicy::worst_wrr_hr();
        case Variant::SwapS2:
            return iteration == 2 ? SelectionPolicy::swap_best(2)
                                  : SelectionPolicy::worst_wrr_hr();
        case Variant::WorstWrrAblation:
            return SelectionPolicy::worst_wrr();
        case Variant::RandomAblation:
            return SelectionPolicy::random(derive_stream(run_seed, iteration));
        default:
            return SelectionPolicy::worst_wrr_hr();
    }
}

std::string summary_csv_text(const std::vector<SummaryRow>& rows) {
    std::string out = "iteration,model,all_crr,all_wrr,seen_crr,seen_wrr,unseen_crr,unseen_wrr\n";
    char buf[192];
    for (const SummaryRow& r : rows) {
        std::snprintf(buf, sizeof(buf), "%u,%s,%.2f,%.2f,%.2f,%.2f,%.2f,%.2f\n", r.iteration,
                      r.model.c_str(), r.all_crr, r.all_wrr, r.seen_crr, r.seen_wrr, r.unseen_crr,
                      r.unseen_wrr);
        out += buf;
    }
    return out;
}

void write_run_artifacts(const RunConfig& config, const LoadedDataset& dataset,
                         const RunResult& run, const std::string& iter0_checkpoint,
                         const std::vector<std::string>& checkpoints) {
    const fs::path out(config.out_dir);
    fs::create_directories(out / "checkpoints");
    fs::create_directories(out / "reports");

    // Self-contained run dir: canonical copies of the dataset it ran on.
    std::string ledger_bytes;
    for (const WordSample& s : dataset.ledger.samples()) ledger_bytes += serialize_sample(s);
    write_file((out / "ledger.jsonl").string(), ledger_bytes);
    ManifestWriter mw;
    mw.config = &dataset.manifest.config;
    mw.users = &dataset.manifest.users;
    mw.standard_writers = &dataset.manifest.standard_writers;
    mw.dataset_digest = dataset.manifest.dataset_digest;
    mw.n_samples = dataset.ledger.samples().size();
    mw.n_pages = dataset.ledger.pages().size();
    write_file((out / "manifest.json").string(), mw.to_json());

    write_file((out / "checkpoints" / "iter0.json").string(), iter0_checkpoint);
    for (std::size_t i = 0; i < run.reports.size(); ++i) {
        const std::string k = std::to_string(i + 1);
        write_file((out / "checkpoints" / ("iter" + k + ".json")).string(), checkpoints[i]);
        write_file((out / "reports" / ("iter" + k + ".json")).string(), run.reports[i].to_json());
        write_file((out / "reports" / ("iter" + k + ".per_user.csv")).string(),
                   per_user_csv(run.reports[i].per_user_test, Role::Test));
    }
    write_file((out / "summary.csv").string(), run.summary_csv);
    write_file((out / "run.json").string(), run_json(run));
    write_file((out / "run.log.jsonl").string(), run.run_log);
}

} // namespace

RunResult run_experiment(const RunConfig& config, const LoadedDataset& dataset,
                         Recognizer& model) {
    const ExperimentConfig& exp = config.experiment;
    if (model.version() == 0) throw protocol_error("recognizer must be initialized before a run");

    RunState state{dataset.ledger, &model, Rng(config.seed),
                   config.variant == Variant::Iter1FT, {}};

    RunResult run;
    run.variant = config.variant;
    run.seed = config.seed;
    run.dataset_digest = dataset.manifest.dataset_digest;
    run.iter0_checkpoint_digest = digest_hex(model.checkpoint_json());
    const std::string iter0_checkpoint = model.checkpoint_json();
    log_event(state, 0, "pretrain",
              {{"checkpoint_digest", run.iter0_checkpoint_digest},
               {"standard_samples", dataset.ledger.standard_train().size()}});

    std::vector<std::string> checkpoints;
    const std::uint32_t total = variant_iterations(config.variant, exp);
    for (std::uint32_t t = 1; t <= total; ++t) {
        const SelectionPolicy policy = policy_for(config.variant, t, config.seed);
        run.reports.push_back(run_iteration(state, t, policy, exp));
        checkpoints.push_back(model.checkpoint_json());
    }
    run.selected_by_iteration = state.ledger.selected_by_iteration();

    // Table-style summary: the seen columns track the iteration-1 cohort
    // (the only users seen by every model), the unseen columns the users
    // never funded during the run.
    run.common_seen = run.selected_by_iteration.at(1);
    const auto split = seen_unseen_split(state.ledger, run.selected_by_iteration);
    run.common_unseen = split.second;
    for (const IterationReport& report : run.reports) {
        SummaryRow row;
        row.iteration = report.iteration;
        row.model = model_label(config.variant, report.iteration);
        const EvalResult all = report.aggregate_test;
        const EvalResult seen = merge_users(report.per_user_test, run.common_seen);
        const EvalResult unseen = merge_users(report.per_user_test, run.common_unseen);
        row.all_crr = all.crr();
        row.all_wrr = all.wrr();
        row.seen_crr = seen.crr();
        row.seen_wrr = seen.wrr();
        row.unseen_crr = unseen.crr();
        row.unseen_wrr = unseen.wrr();
        run.summary.push_back(row);
    }
    run.summary_csv = summary_csv_text(run.summary);
    run.run_log = state.log.str();

    if (!config.out_dir.empty())
        write_run_artifacts(config, dataset, run, iter0_checkpoint, checkpoints);
    return run;
}

RunResult run_experiment(const RunConfig& config, const LoadedDataset& dataset) {
    CentroidModel model(config.experiment.alphabet_size, config.experiment.feature_dim);
    std::vector<const WordSample*> pretrain_corpus;
    for (const WordSample* s : dataset.ledger.standard_train())
        if (is_human_readable(s->readability)) pretrain_corpus.push_back(s);
    model.init_from_class_means(pretrain_corpus, config.experiment.confidence_temperature);
    return run_experiment(config, dataset, model);
}

RunResult run_experiment(const RunConfig& config) {
    if (config.data_dir.empty()) throw config_error("run requires a dataset directory");
    const LoadedDataset dataset = load_dataset(config.data_dir);
    return run_experiment(config, dataset);
}

std::string run_json(const RunResult& run) {
    ojson j;
    j["format_version"] = 1;
    j["variant"] = to_string(run.variant);
    j["seed"] = run.seed;
    j["dataset_digest"] = run.dataset_digest;
    j["iterations"] = run.reports.size();
    j["iter0_checkpoint_digest"] = run.iter0_checkpoint_digest;
    ojson selected;
    for (const auto& [t, users] : run.selected_by_iteration)
        selected[std::to_string(t)] = users;
    j["selected_by_iteration"] = selected;
    j["common_seen"] = run.common_seen;
    j["common_unseen"] = run.common_unseen;
    ojson rows = ojson::array();
    for (const SummaryRow& r : run.summary) {
        ojson e;
        e["iteration"] = r.iteration;
        e["model"] = r.model;
        e["all_crr"] = r.all_crr;
        e["all_wrr"] = r.all_wrr;
        e["seen_crr"] = r.seen_crr;
        e["seen_wrr"] = r.seen_wrr;
        e["unseen_crr"] = r.unseen_crr;
        e["unseen_wrr"] = r.unseen_wrr;
        rows.push_back(e);
    }
    j["summary"] = rows;
    return j.dump(2) + "\n";
}

std::string report_from_run_dir(const std::string& run_dir, const std::string& format) {
    if (format != "csv" && format != "json")
        throw config_error("report format must be csv or json");
    const fs::path base(run_dir);
    nlohmann::json run;
    try {
        run = nlohmann::json::parse(read_file((base / "run.json").string()));
    } catch (const nlohmann::json::exception& e) {
        throw protocol_error("malformed run.json in " + run_dir + ": " + e.what());
    }
    const std::size_t iterations = run.at("iterations").get<std::size_t>();

    if (format == "json") {
        ojson out;
        out["run"] = ojson::parse(run.dump());
        ojson reports = ojson::array();
        for (std::size_t k = 1; k <= iterations; ++k) {
            const auto path = base / "reports" / ("iter" + std::to_string(k) + ".json");
            reports.push_back(ojson::parse(read_file(path.string())));
        }
        out["reports"] = reports;
        return out.dump(2) + "\n";
    }

    std::string out = "iteration,user_id,split,n_words,n_words_hr,crr,wrr,wrr_hr,avg_conf\n";
    char buf[192];
    for (std::size_t k = 1; k <= iterations; ++k) {
        const auto path = base / "reports" / ("iter" + std::to_string(k) + ".json");
        nlohmann::json report;
        try {
            report = nlohmann::json::parse(read_file(path.string()));
        } catch (const nlohmann::json::exception& e) {
            throw protocol_error("malformed report in " + run_dir + ": " + e.what());
        }
        for (const auto& entry : report.at("per_user_test")) {
            const EvalResult r = eval_result_from_json(entry.at("scores"));
            std::snprintf(buf, sizeof(buf), "%zu,%u,test,%llu,%llu,%.2f,%.2f,%.2f,%.4f\n", k,
                          entry.at("user_id").get<UserId>(),
                          static_cast<unsigned long long>(r.n_words),
                          static_cast<unsigned long long>(r.n_words_hr), r.crr(), r.wrr(),
                          r.wrr_hr(), r.avg_char_confidence());
            out += buf;
        }
    }
    return out;
}

std::string compare_runs(const std::vector<std::string>& run_dirs) {
    if (run_dirs.size() < 2) throw protocol_error("compare needs at least two run directories");

    struct LoadedRun {
        std::string dir;
        std::string variant;
        std::uint64_t seed = 0;
        std::string dataset_digest;
        std::vector<std::array<double, 2>> crr_wrr; // per iteration: all-test CRR, WRR
    };

    std::vector<LoadedRun> runs;
    for (const std::string& dir : run_dirs) {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(read_file((fs::path(dir) / "run.json").string()));
        } catch (const nlohmann::json::exception& e) {
            throw protocol_error("malformed run.json in " + dir + ": " + e.what());
        }
        LoadedRun r;
        r.dir = dir;
        r.variant = j.at("variant").get<std::string>();
        r.seed = j.at("seed").get<std::uint64_t>();
        r.dataset_digest = j.at("dataset_digest").get<std::string>();
        for (const auto& row : j.at("summary"))
            r.crr_wrr.push_back({row.at("all_crr").get<double>(), row.at("all_wrr").get<double>()});
        if (r.crr_wrr.empty()) throw protocol_error("run has no summary rows: " + dir);
        runs.push_back(std::move(r));
    }
    for (const LoadedRun& r : runs) {
        if (r.dataset_digest != runs.front().dataset_digest)
            throw protocol_error("manifest mismatch: " + r.dir + " ran on a different dataset");
    }

    ojson out;
    out["dataset_digest"] = runs.front().dataset_digest;
    ojson run_rows = ojson::array();
    for (const LoadedRun& r : runs) {
        ojson e;
        e["dir"] = r.dir;
        e["variant"] = r.variant;
        e["seed"] = r.seed;
        e["final_crr"] = r.crr_wrr.back()[0];
        e["final_wrr"] = r.crr_wrr.back()[1];
        run_rows.push_back(e);
    }
    out["runs"] = run_rows;

    // Deltas of final all-test rates against the first run.
    ojson deltas = ojson::array();
    for (const LoadedRun& r : runs) {
        ojson e;
        e["dir"] = r.dir;
        e["crr_delta"] = r.crr_wrr.back()[0] - runs.front().crr_wrr.back()[0];
        e["wrr_delta"] = r.crr_wrr.back()[1] - runs.front().crr_wrr.back()[1];
        deltas.push_back(e);
    }
    out["deltas_vs_first"] = deltas;

    // Win counts between variants across their common seeds.
    std::map<std::string, std::map<std::uint64_t, double>> final_wrr;
    for (const LoadedRun& r : runs) final_wrr[r.variant][r.seed] = r.crr_wrr.back()[1];
    ojson pairwise = ojson::array();
    for (auto a = final_wrr.begin(); a != final_wrr.end(); ++a) {
        for (auto b = std::next(a); b != final_wrr.end(); ++b) {
            ojson per_seed = ojson::array();
            int wins_a = 0, wins_b = 0, ties = 0;
            double delta_sum = 0.0;
            std::size_t n = 0;
            for (const auto& [seed, wrr_a] : a->second) {
                const auto it = b->second.find(seed);
                if (it == b->second.end()) continue;
                const double delta = wrr_a - it->second;
                delta_sum += delta;
                ++n;
                if (delta > 0)
                    ++wins_a;
                else if (delta < 0)
                    ++wins_b;
                else
                    ++ties;
                ojson e;
                e["seed"] = seed;
                e["a_wrr"] = wrr_a;
                e["b_wrr"] = it->second;
                e["delta"] = delta;
                per_seed.push_back(e);
            }
            if (n == 0) continue;
            ojson pair;
            pair["a"] = a->first;
            pair["b"] = b->first;
            pair["seeds"] = n;
            pair["a_wins"] = wins_a;
            pair["b_wins"] = wins_b;
            pair["ties"] = ties;
            pair["mean_wrr_delta"] = delta_sum / static_cast<double>(n);
            pair["per_seed"] = per_seed;
            pairwise.push_back(pair);
        }
    }
    out["pairwise"] = pairwise;
    return out.dump(2) + "\n";
}

} // namespace hwrloop
