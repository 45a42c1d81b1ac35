#include "fim/data.hpp"
#include "fim/embedding.hpp"
#include "fim/errors.hpp"
#include "fim/evaluation.hpp"
#include "fim/fairness.hpp"
#include "fim/selection.hpp"
#include "fim/synth.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw fim::DataError("cannot open '" + path + "'");
    return in;
}

std::ofstream open_output(const fs::path& path) {
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out)
        throw fim::DataError("cannot write '" + path.string() + "'");
    return out;
}

void echo_resolved_config(CLI::App* cmd, const fs::path& out_dir) {
    auto out = open_output(out_dir / "run_config.resolved");
    out << cmd->config_to_str(true, false);
}

struct Dataset {
    fim::DatasetSplit split;
    fim::AttributeSchema schema;
    fim::ProfileTable profiles;
};

Dataset load_dataset(const std::string& dir) {
    Dataset d;
    {
        auto in = open_input(dir + "/schema.txt");
        d.schema = fim::parse_schema(in);
    }
    {
        auto in = open_input(dir + "/profiles.tsv");
        d.profiles = fim::parse_profiles(in, d.schema);
    }
    const auto load = [&](const char* name) {
        auto in = open_input(dir + "/" + name);
        return fim::parse_cascade_log(in, fim::CascadeFormat::Jsonl);
    };
    d.split.train = load("train.jsonl");
    d.split.validation = load("val.jsonl");
    d.split.test = load("test.jsonl");
    return d;
}

// "gender" is an attribute, "gender,region" combines two into a derived one.
int resolve_attr(const std::string& spec, fim::AttributeSchema& schema,
                 fim::ProfileTable& profiles) {
    std::vector<std::string> names;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = spec.find(',', start);
        names.push_back(spec.substr(start, pos == std::string::npos ? pos : pos - start));
        if (pos == std::string::npos)
            break;
        start = pos + 1;
    }
    if (names.size() == 1)
        return [&] {
            const int a = schema.attribute_index(names[0]);
            if (a < 0)
                throw fim::DataError("unknown attribute '" + names[0] + "'");
            return a;
        }();
    const std::string combined_name = [&] {
        std::string s;
        for (std::size_t i = 0; i < names.size(); ++i)
            s += (i ? "_" : "") + names[i];
        return s;
    }();
    const int existing = schema.attribute_index(combined_name);
    if (existing >= 0)
        return existing;
    return fim::combine_attributes(schema, profiles, names);
}

json stats_to_json(const fim::DatasetStats& s) {
    json j;
    j["influencers"] = s.influencer_count;
    j["influencees"] = s.node_count;
    j["posts"] = s.cascade_count;
    if (s.median_defined)
        j["median_cascade_size"] = s.median_cascade_size;
    else
        j["median_cascade_size"] = nullptr;
    j["max_cascade_size"] = s.max_cascade_size;
    return j;
}

struct SynthArgs {
    std::string preset = "weibo-like";
    std::size_t nodes = 0;
    std::size_t influencers = 0;
    int cascades = 0;
    double edge_prob = -1;
    double act_prob = -1;
    double homophily = -1;
    std::uint64_t seed = 0;
    std::string out;
};

int run_synth(CLI::App* cmd, const SynthArgs& args) {
    fim::SynthConfig cfg =
        args.preset == "digg-like" ? fim::digg_like_config() : fim::weibo_like_config();
    if (cmd->count("--nodes"))
        cfg.nodes = args.nodes;
    if (cmd->count("--influencers"))
        cfg.influencers = args.influencers;
    if (cmd->count("--cascades-per-influencer"))
        cfg.cascades_per_influencer = args.cascades;
    if (cmd->count("--edge-prob"))
        cfg.edge_prob = args.edge_prob;
    if (cmd->count("--act-prob"))
        cfg.activation_prob = args.act_prob;
    if (cmd->count("--homophily"))
        cfg.homophily = args.homophily;
    if (cmd->count("--seed") || std::getenv("FIM_SEED"))
        cfg.seed = args.seed;

    const fim::SynthData data = fim::gen_graph(cfg);
    const fim::CascadeLog log =
        fim::simulate_ic_cascades(data.graph, data.node_names, data.influencer_count,
                                  cfg.activation_prob, cfg.cascades_per_influencer, cfg.seed);
    const fs::path dir(args.out);
    {
        auto out = open_output(dir / "cascades.jsonl");
        fim::write_cascade_jsonl(log, out);
    }
    {
        auto out = open_output(dir / "profiles.tsv");
        fim::write_profiles_tsv(data.profiles, data.schema, out);
    }
    {
        auto out = open_output(dir / "schema.txt");
        fim::write_schema(data.schema, out);
    }
    {
        auto out = open_output(dir / "graph.edges");
        fim::write_edge_list(data.graph, data.node_names, out);
    }
    echo_resolved_config(cmd, dir);
    std::cout << stats_to_json(fim::dataset_stats(log)).dump(2) << '\n';
    return 0;
}

struct FlipArgs {
    std::string cascades, profiles, schema, attr, from, to, out;
    double frac_influencers = 0.5;
    double frac_participants = 0.5;
    std::uint64_t seed = 7;
};

int run_flip(CLI::App* cmd, const FlipArgs& args) {
    auto schema_in = open_input(args.schema);
    fim::AttributeSchema schema = fim::parse_schema(schema_in);
    auto profiles_in = open_input(args.profiles);
    fim::ProfileTable profiles = fim::parse_profiles(profiles_in, schema);
    auto cascades_in = open_input(args.cascades);
    const fim::CascadeLog log = fim::parse_cascade_log(cascades_in, fim::CascadeFormat::Jsonl);

    const auto& attr = schema.attribute(args.attr);
    const int attr_idx = schema.attribute_index(args.attr);
    const auto cat = [&](const std::string& label) {
        const auto it = std::find(attr.categories.begin(), attr.categories.end(), label);
        if (it == attr.categories.end())
            throw fim::DataError("unknown category '" + label + "' for '" + args.attr + "'");
        return static_cast<int>(it - attr.categories.begin());
    };
    fim::Rng rng(fim::derive_seed(args.seed, "flip"));
    const fim::FlipAudit audit =
        fim::flip_attribute(log, profiles, attr_idx, cat(args.from), cat(args.to),
                            args.frac_influencers, args.frac_participants, rng);
    const fs::path dir(args.out);
    {
        auto out = open_output(dir / "profiles.tsv");
        fim::write_profiles_tsv(profiles, schema, out);
    }
    {
        auto out = open_output(dir / "schema.txt");
        fim::write_schema(schema, out);
    }
    {
        auto out = open_output(dir / "audit.json");
        fim::write_flip_audit_json(audit, schema, out);
    }
    echo_resolved_config(cmd, dir);
    std::cout << "flipped " << audit.flipped_users.size() << " users across "
              << audit.selected_influencers.size() << " influencers\n";
    return 0;
}

struct IngestArgs {
    std::string cascades, profiles, schema, out;
    std::string format = "jsonl";
    std::vector<double> ratios{0.6, 0.2, 0.2};
};

int run_ingest(CLI::App* cmd, const IngestArgs& args) {
    auto schema_in = open_input(args.schema);
    const fim::AttributeSchema schema = fim::parse_schema(schema_in);
    auto profiles_in = open_input(args.profiles);
    const fim::ProfileTable profiles = fim::parse_profiles(profiles_in, schema);
    auto cascades_in = open_input(args.cascades);
    const fim::CascadeLog log = fim::parse_cascade_log(
        cascades_in, args.format == "tsv" ? fim::CascadeFormat::Tsv : fim::CascadeFormat::Jsonl);
    if (args.ratios.size() != 3)
        throw fim::DataError("--ratios needs exactly three values");
    const fim::DatasetSplit split =
        fim::split_by_time(log, args.ratios[0], args.ratios[1], args.ratios[2]);

    const fs::path dir(args.out);
    const auto dump = [&](const fim::CascadeLog& part, const char* name) {
        auto out = open_output(dir / name);
        fim::write_cascade_jsonl(part, out);
    };
    dump(split.train, "train.jsonl");
    dump(split.validation, "val.jsonl");
    dump(split.test, "test.jsonl");
    {
        auto out = open_output(dir / "profiles.tsv");
        fim::write_profiles_tsv(profiles, schema, out);
    }
    {
        auto out = open_output(dir / "schema.txt");
        fim::write_schema(schema, out);
    }
    json stats;
    stats["all"] = stats_to_json(fim::dataset_stats(log));
    stats["train"] = stats_to_json(fim::dataset_stats(split.train));
    stats["validation"] = stats_to_json(fim::dataset_stats(split.validation));
    stats["test"] = stats_to_json(fim::dataset_stats(split.test));
    {
        auto out = open_output(dir / "stats.json");
        out << stats.dump(2) << '\n';
    }
    echo_resolved_config(cmd, dir);
    std::cout << stats.dump(2) << '\n';
    return 0;
}

struct TrainArgs {
    std::string data, mode = "fac", attr, out;
    std::size_t dim = 50;
    int epochs = 10;
    double lr = 0.1;
    double eta = 120;
    int negatives = 10;
    double noise_exponent = 0.75;
    int floor = 3;
    std::string fac_targets = "pooled";
    std::uint64_t seed = 1;
    int threads = 1;
    std::string dump_contexts;
};

int run_train(CLI::App* cmd, const TrainArgs& args) {
    Dataset data = load_dataset(args.data);
    const int attr = resolve_attr(args.attr, data.schema, data.profiles);

    fim::TrainConfig cfg;
    cfg.embed_dim = args.dim;
    cfg.epochs = args.epochs;
    cfg.learning_rate = args.lr;
    cfg.eta_percent = args.eta;
    cfg.negatives = args.negatives;
    cfg.noise_exponent = args.noise_exponent;
    cfg.min_cascade_floor = args.floor;
    cfg.mode = fim::parse_train_mode(args.mode);
    cfg.fac_targets_averaged = args.fac_targets == "averaged";
    cfg.seed = args.seed;
    cfg.threads = args.threads;
    cfg.dump_contexts_path = args.dump_contexts;

    fim::TrainTrace trace;
    const fim::EmbeddingModel model =
        fim::train(data.split.train, data.profiles, data.schema, attr, cfg, &trace);
    const fs::path out(args.out);
    if (out.has_parent_path())
        fs::create_directories(out.parent_path());
    fim::save_model(model, args.out);
    echo_resolved_config(cmd, out.has_parent_path() ? out.parent_path() : fs::path("."));
    for (std::size_t e = 0; e < trace.epoch_mean_nce_loss.size(); ++e) {
        std::cout << "epoch " << e << " nce_loss " << trace.epoch_mean_nce_loss[e];
        if (cfg.mode != fim::TrainMode::FPS)
            std::cout << " fairness_loss " << trace.epoch_mean_fairness_loss[e];
        std::cout << '\n';
    }
    std::cout << "model written to " << args.out << '\n';
    return 0;
}

struct SelectArgs {
    std::string model, data, attr, out;
    int k = 10;
    double alpha = 0.2;
    bool include_bias = false;
};

int run_select(CLI::App* cmd, const SelectArgs& args) {
    Dataset data = load_dataset(args.data);
    const int attr = resolve_attr(args.attr, data.schema, data.profiles);
    const fim::EmbeddingModel model = fim::load_model(args.model);
    const auto population = fim::category_population(
        data.split.train, data.profiles, attr,
        data.schema.attributes[static_cast<std::size_t>(attr)].categories.size());
    const fim::SelectionInputs inputs = fim::build_selection_inputs(
        model, data.split.train, data.profiles, attr, population, args.include_bias);
    const fim::SeedSet seeds = fim::fair_greedy(inputs, args.k, args.alpha);

    const fs::path out(args.out);
    {
        auto f = open_output(out);
        fim::write_seed_set_json(seeds, inputs, f);
    }
    echo_resolved_config(cmd, out.has_parent_path() ? out.parent_path() : fs::path("."));
    std::cout << "selected " << seeds.seeds.size() << " seeds (" << seeds.evaluations
              << " evaluations)\n";
    return 0;
}

struct EvaluateArgs {
    std::string seeds, data, out;
    std::vector<std::string> attrs;
};

int run_evaluate(CLI::App* cmd, const EvaluateArgs& args) {
    Dataset data = load_dataset(args.data);
    auto seeds_in = open_input(args.seeds);
    std::vector<std::string> seed_ids;
    const fim::SeedSet seeds = fim::read_seed_set_json(seeds_in, &seed_ids);
    const fim::DniResult spread = fim::dni(seed_ids, data.split.test);

    fim::CascadeLog all;
    {
        std::vector<fim::Cascade> cascades = data.split.train.cascades;
        cascades.insert(cascades.end(), data.split.validation.cascades.begin(),
                        data.split.validation.cascades.end());
        cascades.insert(cascades.end(), data.split.test.cascades.begin(),
                        data.split.test.cascades.end());
        all = fim::CascadeLog::from_cascades(std::move(cascades));
    }

    json fairness = json::object();
    json groups = json::object();
    for (const auto& spec : args.attrs) {
        const int attr = resolve_attr(spec, data.schema, data.profiles);
        const auto& categories =
            data.schema.attributes[static_cast<std::size_t>(attr)].categories;
        const auto population =
            fim::category_population(all, data.profiles, attr, categories.size());
        const fim::FairnessScore score =
            fim::spread_fairness(spread.influenced, data.profiles, attr, population);
        fairness[spec] = score.value;
        json counts;
        std::vector<long long> per_cat(categories.size(), 0);
        for (const auto& user : spread.influenced)
            ++per_cat[static_cast<std::size_t>(data.profiles.category_of(user, attr))];
        for (std::size_t i = 0; i < categories.size(); ++i)
            counts[categories[i]] = per_cat[i];
        groups[spec] = std::move(counts);
    }
    json j;
    j["k"] = seeds.k;
    j["alpha"] = seeds.alpha;
    j["dni"] = spread.count();
    j["fairness"] = std::move(fairness);
    j["groups"] = std::move(groups);
    if (!args.out.empty()) {
        auto f = open_output(args.out);
        f << j.dump(2) << '\n';
        echo_resolved_config(cmd, fs::path(args.out).has_parent_path()
                                      ? fs::path(args.out).parent_path()
                                      : fs::path("."));
    }
    std::cout << j.dump(2) << '\n';
    return 0;
}

struct SweepArgs {
    std::string data, out;
    std::vector<std::string> models;
    std::vector<std::string> attrs;
    std::vector<int> k_values{10};
    std::vector<double> alpha_values{0.2};
    bool include_bias = false;
    bool baseline = false;
};

int run_sweep(CLI::App* cmd, const SweepArgs& args) {
    Dataset data = load_dataset(args.data);
    std::vector<fim::EmbeddingModel> models;
    models.reserve(args.models.size());
    for (const auto& path : args.models)
        models.push_back(fim::load_model(path));
    std::vector<fim::SweepModel> sweep_models;
    for (std::size_t i = 0; i < models.size(); ++i) {
        std::string label = fim::train_mode_name(models[i].mode);
        for (std::size_t j = 0; j < i; ++j)
            if (sweep_models[j].label == label)
                label += "#" + std::to_string(i);
        sweep_models.push_back({label, &models[i]});
    }
    std::vector<std::string> attr_names;
    for (const auto& spec : args.attrs) {
        const int attr = resolve_attr(spec, data.schema, data.profiles);
        attr_names.push_back(data.schema.attributes[static_cast<std::size_t>(attr)].name);
    }

    fim::EvaluationReport report =
        fim::sweep(data.split, data.profiles, data.schema, attr_names, sweep_models,
                   args.k_values, args.alpha_values, args.include_bias);

    if (args.baseline) {
        fim::CascadeLog all;
        std::vector<fim::Cascade> cascades = data.split.train.cascades;
        cascades.insert(cascades.end(), data.split.validation.cascades.begin(),
                        data.split.validation.cascades.end());
        cascades.insert(cascades.end(), data.split.test.cascades.begin(),
                        data.split.test.cascades.end());
        all = fim::CascadeLog::from_cascades(std::move(cascades));
        for (const auto& attr_name : attr_names) {
            const int attr = data.schema.attribute_index(attr_name);
            const auto& categories =
                data.schema.attributes[static_cast<std::size_t>(attr)].categories;
            const auto population =
                fim::category_population(all, data.profiles, attr, categories.size());
            for (const int k : args.k_values) {
                const auto start = std::chrono::steady_clock::now();
                const auto seeds = fim::avg_cascade_baseline(
                    data.split.train, std::min<int>(k, static_cast<int>(
                                                           data.split.train.influencers.size())));
                const fim::DniResult spread = fim::dni(seeds, data.split.test);
                const auto score =
                    fim::spread_fairness(spread.influenced, data.profiles, attr, population);
                const auto end = std::chrono::steady_clock::now();
                fim::ReportRow row;
                row.mode = "avg-cascades";
                row.attr = attr_name;
                row.k = k;
                row.alpha = 0;
                row.dni = static_cast<long long>(spread.count());
                row.fairness = score.value;
                row.group_counts.assign(categories.size(), 0);
                for (const auto& user : spread.influenced)
                    ++row.group_counts[static_cast<std::size_t>(
                        data.profiles.category_of(user, attr))];
                row.runtime_ms = std::chrono::duration<double, std::milli>(end - start).count();
                report.rows.push_back(std::move(row));
            }
        }
    }

    const fs::path dir(args.out);
    {
        auto f = open_output(dir / "report.csv");
        fim::write_report_csv(report, f);
    }
    {
        auto f = open_output(dir / "report.json");
        fim::write_report_json(report, f);
    }
    for (const auto& attr_name : attr_names) {
        auto f = open_output(dir / ("scatter_" + attr_name + ".svg"));
        fim::write_report_svg(report, attr_name, f);
    }
    echo_resolved_config(cmd, dir);
    std::cout << report.rows.size() << " report rows written to " << args.out << '\n';
    return 0;
}

struct ConcatArgs {
    std::vector<std::string> models;
    std::string out;
};

int run_concat(const ConcatArgs& args) {
    std::vector<fim::EmbeddingModel> models;
    models.reserve(args.models.size());
    for (const auto& path : args.models)
        models.push_back(fim::load_model(path));
    const fim::EmbeddingModel combined = fim::concat_models(models);
    const fs::path out(args.out);
    if (out.has_parent_path())
        fs::create_directories(out.parent_path());
    fim::save_model(combined, args.out);
    std::cout << "combined model (|E| = " << combined.embed_dim << ") written to " << args.out
              << '\n';
    return 0;
}

struct InspectArgs {
    std::string model, out;
    std::size_t top = 5;
};

int run_inspect(const InspectArgs& args) {
    const fim::EmbeddingModel model = fim::load_model(args.model);
    const std::string text = fim::model_summary_json(model, args.top);
    if (!args.out.empty()) {
        auto f = open_output(args.out);
        f << text << '\n';
    }
    std::cout << text << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fairness-aware influence maximization from diffusion cascades"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Read options from a key = value file");
    app.failure_message(CLI::FailureMessage::help);

    SynthArgs synth_args;
    auto* synth = app.add_subcommand("synth", "Generate a synthetic cascade dataset");
    synth->add_option("--preset", synth_args.preset, "weibo-like or digg-like")
        ->check(CLI::IsMember({"weibo-like", "digg-like"}))
        ->capture_default_str();
    synth->add_option("--nodes", synth_args.nodes, "node count");
    synth->add_option("--influencers", synth_args.influencers, "influencer count");
    synth->add_option("--cascades-per-influencer", synth_args.cascades, "cascades per influencer");
    synth->add_option("--edge-prob", synth_args.edge_prob, "edge probability");
    synth->add_option("--act-prob", synth_args.act_prob, "IC activation probability");
    synth->add_option("--homophily", synth_args.homophily, "homophily strength in [0,1]");
    synth->add_option("--seed", synth_args.seed, "rng seed")->envname("FIM_SEED");
    synth->add_option("--out", synth_args.out, "output directory")->required();

    FlipArgs flip_args;
    auto* flip = app.add_subcommand("flip", "Unbalance an attribute by flipping profiles");
    flip->add_option("--cascades", flip_args.cascades)->required();
    flip->add_option("--profiles", flip_args.profiles)->required();
    flip->add_option("--schema", flip_args.schema)->required();
    flip->add_option("--attr", flip_args.attr)->required();
    flip->add_option("--from", flip_args.from, "category to flip from")->required();
    flip->add_option("--to", flip_args.to, "category to flip to")->required();
    flip->add_option("--frac-influencers", flip_args.frac_influencers)->capture_default_str();
    flip->add_option("--frac-participants", flip_args.frac_participants)->capture_default_str();
    flip->add_option("--seed", flip_args.seed)->envname("FIM_SEED")->capture_default_str();
    flip->add_option("--out", flip_args.out, "output directory")->required();

    IngestArgs ingest_args;
    auto* ingest = app.add_subcommand("ingest", "Normalize, split and summarize a cascade log");
    ingest->add_option("--cascades", ingest_args.cascades)->required();
    ingest->add_option("--profiles", ingest_args.profiles)->required();
    ingest->add_option("--schema", ingest_args.schema)->required();
    ingest->add_option("--format", ingest_args.format)
        ->check(CLI::IsMember({"jsonl", "tsv"}))
        ->capture_default_str();
    ingest->add_option("--ratios", ingest_args.ratios, "train,val,test fractions")
        ->delimiter(',')
        ->capture_default_str();
    ingest->add_option("--out", ingest_args.out, "output directory")->required();

    TrainArgs train_args;
    auto* train = app.add_subcommand("train", "Train an embedding model");
    train->add_option("--data", train_args.data, "ingested dataset directory")->required();
    train->add_option("--mode", train_args.mode, "fps, fac or fps-fac")
        ->check(CLI::IsMember({"fps", "fac", "fps-fac"}))
        ->capture_default_str();
    train->add_option("--attr", train_args.attr, "attribute, comma-joined to combine")->required();
    train->add_option("--dim", train_args.dim)->capture_default_str();
    train->add_option("--epochs", train_args.epochs)->capture_default_str();
    train->add_option("--lr", train_args.lr)->capture_default_str();
    train->add_option("--eta", train_args.eta, "context oversampling percentage")
        ->capture_default_str();
    train->add_option("--neg", train_args.negatives, "negative samples per positive")
        ->capture_default_str();
    train->add_option("--noise-exponent", train_args.noise_exponent)->capture_default_str();
    train->add_option("--floor", train_args.floor, "minimum non-empty cascades per influencer")
        ->capture_default_str();
    train->add_option("--fac-targets", train_args.fac_targets, "pooled or averaged")
        ->check(CLI::IsMember({"pooled", "averaged"}))
        ->capture_default_str();
    train->add_option("--seed", train_args.seed)->envname("FIM_SEED")->capture_default_str();
    train->add_option("--threads", train_args.threads, ">1 is fast but not bit-reproducible")
        ->envname("FIM_THREADS")
        ->capture_default_str();
    train->add_option("--dump-contexts", train_args.dump_contexts,
                      "write the first epoch's sampled contexts to this jsonl file");
    train->add_option("--out", train_args.out, "model file")->required();

    SelectArgs select_args;
    auto* select = app.add_subcommand("select", "Pick spread seeds with the fair-greedy rule");
    select->add_option("--model", select_args.model)->required();
    select->add_option("--data", select_args.data)->required();
    select->add_option("--attr", select_args.attr)->required();
    select->add_option("--k", select_args.k)->capture_default_str();
    select->add_option("--alpha", select_args.alpha, "aversion to unfairness in [0,1]")
        ->capture_default_str();
    select->add_flag("--include-bias", select_args.include_bias,
                     "add the output bias into diffusion probabilities");
    select->add_option("--out", select_args.out, "seed json file")->required();

    EvaluateArgs evaluate_args;
    auto* evaluate = app.add_subcommand("evaluate", "Score a seed set on the held-out split");
    evaluate->add_option("--seeds", evaluate_args.seeds)->required();
    evaluate->add_option("--data", evaluate_args.data)->required();
    evaluate->add_option("--attr", evaluate_args.attrs, "repeatable attribute spec")
        ->required()
        ->take_all();
    evaluate->add_option("--out", evaluate_args.out, "optional report file");

    SweepArgs sweep_args;
    auto* sweep = app.add_subcommand("sweep", "Grid-evaluate models over k and alpha");
    sweep->add_option("--data", sweep_args.data)->required();
    sweep->add_option("--model", sweep_args.models, "repeatable model file")
        ->required()
        ->take_all();
    sweep->add_option("--attr", sweep_args.attrs, "repeatable attribute spec")
        ->required()
        ->take_all();
    sweep->add_option("--k", sweep_args.k_values)->delimiter(',')->capture_default_str();
    sweep->add_option("--alpha", sweep_args.alpha_values)->delimiter(',')->capture_default_str();
    sweep->add_flag("--include-bias", sweep_args.include_bias);
    sweep->add_flag("--baseline", sweep_args.baseline, "add avg-cascades baseline rows");
    sweep->add_option("--out", sweep_args.out, "output directory")->required();

    ConcatArgs concat_args;
    auto* concat = app.add_subcommand("concat-models",
                                      "Concatenate per-attribute models along the embedding axis");
    concat->add_option("--model", concat_args.models, "repeatable model file")
        ->required()
        ->take_all();
    concat->add_option("--out", concat_args.out, "combined model file")->required();

    InspectArgs inspect_args;
    auto* inspect = app.add_subcommand("inspect-model", "Dump model dimensions and norms");
    inspect->add_option("--model", inspect_args.model)->required();
    inspect->add_option("--top", inspect_args.top, "top influencers by norm")
        ->capture_default_str();
    inspect->add_option("--out", inspect_args.out, "optional json file");

    try {
        app.parse(argc, argv);
        if (synth->parsed())
            return run_synth(synth, synth_args);
        if (flip->parsed())
            return run_flip(flip, flip_args);
        if (ingest->parsed())
            return run_ingest(ingest, ingest_args);
        if (train->parsed())
            return run_train(train, train_args);
        if (select->parsed())
            return run_select(select, select_args);
        if (evaluate->parsed())
            return run_evaluate(evaluate, evaluate_args);
        if (sweep->parsed())
            return run_sweep(sweep, sweep_args);
        if (concat->parsed())
            return run_concat(concat_args);
        if (inspect->parsed())
            return run_inspect(inspect_args);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    } catch (const fim::NumericError& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const fim::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const fim::DataError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    }
    return 0;
}
