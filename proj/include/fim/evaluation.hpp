#pragma once

#include "fim/data.hpp"
#include "fim/embedding.hpp"
#include "fim/fairness.hpp"
#include "fim/selection.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace fim {

struct DniResult {
    std::vector<std::string> influenced; // sorted distinct participants, seeds excluded
    std::size_t count() const { return influenced.size(); }
};

// Union of participants over test cascades initiated by the seeds.
DniResult dni(const std::vector<std::string>& seed_ids, const CascadeLog& test);

// Top-k influencers by mean participant count of their cascades, ties by id.
std::vector<std::string> avg_cascade_baseline(const CascadeLog& train, int k);

// Concatenates per-attribute embeddings along the embedding dimension; biases
// b are summed, the fairness branches concatenate likewise.
EmbeddingModel concat_models(const std::vector<EmbeddingModel>& models);

struct ReportRow {
    std::string mode;
    std::string attr;
    int k = 0;
    double alpha = 0;
    long long dni = 0;
    double fairness = 0;
    std::vector<long long> group_counts; // influenced per category of attr
    double runtime_ms = 0;
};

struct EvaluationReport {
    struct AttrGroups {
        std::string attr;
        std::vector<std::string> labels;
    };
    std::vector<AttrGroups> groups; // category labels per attribute, for headers
    std::vector<ReportRow> rows;
};

struct SweepModel {
    std::string label; // mode tag used in report rows
    const EmbeddingModel* model = nullptr;
};

// One row per (model, attr, k, alpha); seeds are selected with the row's attr
// driving the fairness vector and evaluated on the test split.
EvaluationReport sweep(const DatasetSplit& split, const ProfileTable& profiles,
                       const AttributeSchema& schema, const std::vector<std::string>& attrs,
                       const std::vector<SweepModel>& models, const std::vector<int>& k_values,
                       const std::vector<double>& alpha_values, bool include_bias = false);

void write_report_csv(const EvaluationReport& report, std::ostream& out);
void write_report_json(const EvaluationReport& report, std::ostream& out);
// Scatter of fairness (y) against DNI (x) for one attribute, one marker per row.
void write_report_svg(const EvaluationReport& report, const std::string& attr, std::ostream& out);

} // namespace fim
