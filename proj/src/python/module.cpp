#include "fim/data.hpp"
#include "fim/embedding.hpp"
#include "fim/errors.hpp"
#include "fim/evaluation.hpp"
#include "fim/fairness.hpp"
#include "fim/sampling.hpp"
#include "fim/selection.hpp"
#include "fim/synth.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <fstream>
#include <sstream>

namespace py = pybind11;
using namespace fim;

namespace {

CascadeLog log_from_file(const std::string& path, const std::string& format) {
    std::ifstream in(path);
    if (!in)
        throw DataError("cannot open '" + path + "'");
    return parse_cascade_log(in, format == "tsv" ? CascadeFormat::Tsv : CascadeFormat::Jsonl);
}

CascadeLog log_from_string(const std::string& text, const std::string& format) {
    std::istringstream in(text);
    return parse_cascade_log(in, format == "tsv" ? CascadeFormat::Tsv : CascadeFormat::Jsonl);
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Fairness-aware influence maximization from diffusion cascades";

    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
    py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
    py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

    py::class_<AttributeSchema>(m, "AttributeSchema")
        .def(py::init([](const std::vector<std::pair<std::string, std::vector<std::string>>>& attrs) {
                 AttributeSchema schema;
                 for (const auto& [name, cats] : attrs)
                     schema.attributes.push_back({name, cats});
                 schema.validate();
                 return schema;
             }),
             py::arg("attributes"))
        .def("attribute_index", &AttributeSchema::attribute_index)
        .def_property_readonly("attributes", [](const AttributeSchema& s) {
            std::vector<std::pair<std::string, std::vector<std::string>>> out;
            for (const auto& a : s.attributes)
                out.push_back({a.name, a.categories});
            return out;
        });

    py::class_<ProfileTable>(m, "ProfileTable")
        .def(py::init<>())
        .def("insert", &ProfileTable::insert)
        .def("category_of", &ProfileTable::category_of)
        .def("__len__", [](const ProfileTable& t) { return t.entries.size(); });

    py::class_<Cascade>(m, "Cascade")
        .def_readonly("id", &Cascade::id)
        .def_property_readonly("initiator", &Cascade::initiator)
        .def_property_readonly("events", [](const Cascade& c) {
            std::vector<std::pair<std::string, std::int64_t>> out;
            for (const auto& e : c.events)
                out.push_back({e.user, e.time});
            return out;
        });

    py::class_<CascadeLog>(m, "CascadeLog")
        .def_readonly("cascades", &CascadeLog::cascades)
        .def_readonly("influencers", &CascadeLog::influencers)
        .def_readonly("nodes", &CascadeLog::nodes);

    py::class_<DatasetSplit>(m, "DatasetSplit")
        .def_readonly("train", &DatasetSplit::train)
        .def_readonly("validation", &DatasetSplit::validation)
        .def_readonly("test", &DatasetSplit::test);

    m.def("parse_cascade_log", &log_from_file, py::arg("path"), py::arg("format") = "jsonl");
    m.def("parse_cascade_log_str", &log_from_string, py::arg("text"), py::arg("format") = "jsonl");
    m.def(
        "parse_profiles",
        [](const std::string& path, const AttributeSchema& schema) {
            std::ifstream in(path);
            if (!in)
                throw DataError("cannot open '" + path + "'");
            return parse_profiles(in, schema);
        },
        py::arg("path"), py::arg("schema"));
    m.def(
        "parse_schema",
        [](const std::string& path) {
            std::ifstream in(path);
            if (!in)
                throw DataError("cannot open '" + path + "'");
            return parse_schema(in);
        },
        py::arg("path"));
    m.def("split_by_time", &split_by_time, py::arg("log"), py::arg("train") = 0.6,
          py::arg("validation") = 0.2, py::arg("test") = 0.2);
    m.def(
        "combine_attributes",
        [](AttributeSchema& schema, ProfileTable& profiles, const std::vector<std::string>& names) {
            return combine_attributes(schema, profiles, names);
        },
        py::arg("schema"), py::arg("profiles"), py::arg("names"));
    m.def("dataset_stats", [](const CascadeLog& log) {
        const DatasetStats s = dataset_stats(log);
        py::dict d;
        d["influencers"] = s.influencer_count;
        d["influencees"] = s.node_count;
        d["posts"] = s.cascade_count;
        d["median_cascade_size"] = s.median_defined ? py::cast(s.median_cascade_size) : py::none();
        d["max_cascade_size"] = s.max_cascade_size;
        return d;
    });

    m.def("fairness_score", [](const std::vector<double>& ratios) {
        const FairnessScore s = fairness_score(ratios);
        py::dict d;
        d["value"] = s.value;
        d["cv"] = s.cv;
        d["mu"] = s.mu;
        d["sigma"] = s.sigma;
        d["mu_zero"] = s.mu_zero;
        return d;
    });
    m.def("category_population", &category_population, py::arg("log"), py::arg("profiles"),
          py::arg("attr"), py::arg("n_categories"));
    m.def("influencer_fairness_pooled", &influencer_fairness_pooled);
    m.def("influencer_fairness_avg", &influencer_fairness_avg);
    m.def(
        "spread_fairness",
        [](const std::vector<std::string>& influenced, const ProfileTable& profiles, int attr,
           const std::vector<long long>& population) {
            return spread_fairness(influenced, profiles, attr, population).value;
        },
        py::arg("influenced"), py::arg("profiles"), py::arg("attr"), py::arg("population"));

    m.def(
        "temporal_weights", [](const Cascade& c) { return temporal_weights(c); }, py::arg("cascade"));

    py::class_<TrainConfig>(m, "TrainConfig")
        .def(py::init<>())
        .def_readwrite("embed_dim", &TrainConfig::embed_dim)
        .def_readwrite("epochs", &TrainConfig::epochs)
        .def_readwrite("learning_rate", &TrainConfig::learning_rate)
        .def_readwrite("negatives", &TrainConfig::negatives)
        .def_readwrite("eta_percent", &TrainConfig::eta_percent)
        .def_readwrite("seed", &TrainConfig::seed)
        .def_readwrite("noise_exponent", &TrainConfig::noise_exponent)
        .def_readwrite("min_cascade_floor", &TrainConfig::min_cascade_floor)
        .def_readwrite("threads", &TrainConfig::threads)
        .def_property(
            "mode", [](const TrainConfig& c) { return std::string(train_mode_name(c.mode)); },
            [](TrainConfig& c, const std::string& name) { c.mode = parse_train_mode(name); });

    py::class_<EmbeddingModel>(m, "EmbeddingModel")
        .def_property_readonly("mode",
                               [](const EmbeddingModel& m_) {
                                   return std::string(train_mode_name(m_.mode));
                               })
        .def_readonly("num_influencers", &EmbeddingModel::num_influencers)
        .def_readonly("num_nodes", &EmbeddingModel::num_nodes)
        .def_readonly("embed_dim", &EmbeddingModel::embed_dim)
        .def_readonly("influencer_ids", &EmbeddingModel::influencer_ids)
        .def_readonly("node_ids", &EmbeddingModel::node_ids)
        .def("score_pair",
             [](const EmbeddingModel& m_, const std::string& u, const std::string& v) {
                 return score_pair(m_, u, v);
             });

    m.def(
        "train",
        [](const CascadeLog& log, const ProfileTable& profiles, const AttributeSchema& schema,
           int attr, const TrainConfig& config) { return train(log, profiles, schema, attr, config); },
        py::arg("train_log"), py::arg("profiles"), py::arg("schema"), py::arg("attr"),
        py::arg("config"));
    m.def("save_model", &save_model);
    m.def("load_model", &load_model);
    m.def("model_summary_json", &model_summary_json, py::arg("model"), py::arg("top_k") = 5);

    py::class_<SeedSet>(m, "SeedSet")
        .def_readonly("alpha", &SeedSet::alpha)
        .def_readonly("k", &SeedSet::k)
        .def_readonly("evaluations", &SeedSet::evaluations);

    py::class_<SelectionInputs>(m, "SelectionInputs")
        .def_readonly("influencer_ids", &SelectionInputs::influencer_ids)
        .def_readonly("lambda_", &SelectionInputs::lambda)
        .def_readonly("fairness", &SelectionInputs::fairness);

    m.def("build_selection_inputs", &build_selection_inputs, py::arg("model"),
          py::arg("train_log"), py::arg("profiles"), py::arg("attr"), py::arg("population"),
          py::arg("include_bias") = false);
    m.def(
        "fair_greedy",
        [](const SelectionInputs& inputs, int k, double alpha) {
            const SeedSet seeds = fair_greedy(inputs, k, alpha);
            std::vector<py::dict> out;
            for (const auto& s : seeds.seeds) {
                py::dict d;
                d["id"] = inputs.influencer_ids[static_cast<std::size_t>(s.influencer)];
                d["omega"] = s.omega;
                d["omega_scaled"] = s.omega_scaled;
                d["fairness"] = s.fairness;
                std::vector<std::string> claimed;
                for (const int v : s.claimed)
                    claimed.push_back(inputs.node_ids[static_cast<std::size_t>(v)]);
                d["claimed"] = claimed;
                out.push_back(std::move(d));
            }
            return out;
        },
        py::arg("inputs"), py::arg("k"), py::arg("alpha") = 0.2);
    m.def("expected_spread", &expected_spread);

    m.def(
        "dni",
        [](const std::vector<std::string>& seed_ids, const CascadeLog& test) {
            const DniResult r = dni(seed_ids, test);
            return py::make_tuple(r.count(), r.influenced);
        },
        py::arg("seed_ids"), py::arg("test"));
    m.def("avg_cascade_baseline", &avg_cascade_baseline);
    m.def("concat_models", &concat_models);

    py::class_<SynthConfig>(m, "SynthConfig")
        .def_readwrite("nodes", &SynthConfig::nodes)
        .def_readwrite("influencers", &SynthConfig::influencers)
        .def_readwrite("homophily", &SynthConfig::homophily)
        .def_readwrite("edge_prob", &SynthConfig::edge_prob)
        .def_readwrite("activation_prob", &SynthConfig::activation_prob)
        .def_readwrite("cascades_per_influencer", &SynthConfig::cascades_per_influencer)
        .def_readwrite("seed", &SynthConfig::seed);
    m.def("weibo_like_config", &weibo_like_config);
    m.def("digg_like_config", &digg_like_config);

    py::class_<SynthData>(m, "SynthData")
        .def_readonly("schema", &SynthData::schema)
        .def_readonly("profiles", &SynthData::profiles)
        .def_readonly("node_names", &SynthData::node_names)
        .def_readonly("influencer_count", &SynthData::influencer_count);
    m.def("gen_graph", &gen_graph);
    m.def(
        "simulate_ic_cascades",
        [](const SynthData& data, double activation_prob, int cascades_per_influencer,
           std::uint64_t seed) {
            return simulate_ic_cascades(data.graph, data.node_names, data.influencer_count,
                                        activation_prob, cascades_per_influencer, seed);
        },
        py::arg("data"), py::arg("activation_prob"), py::arg("cascades_per_influencer"),
        py::arg("seed"));
    m.def(
        "flip_attribute",
        [](const CascadeLog& log, ProfileTable& profiles, int attr, int from_category,
           int to_category, double frac_influencers, double frac_participants, std::uint64_t seed) {
            Rng rng(derive_seed(seed, "flip"));
            const FlipAudit audit = flip_attribute(log, profiles, attr, from_category, to_category,
                                                   frac_influencers, frac_participants, rng);
            py::dict d;
            d["selected_influencers"] = audit.selected_influencers;
            d["flipped_users"] = audit.flipped_users;
            return d;
        },
        py::arg("log"), py::arg("profiles"), py::arg("attr"), py::arg("from_category"),
        py::arg("to_category"), py::arg("frac_influencers") = 0.5,
        py::arg("frac_participants") = 0.5, py::arg("seed") = 7);
}
