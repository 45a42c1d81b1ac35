#include "fim/evaluation.hpp"

#include "fim/errors.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <nlohmann/json.hpp>
#include <ostream>
#include <set>
#include <unordered_set>

namespace fim {

DniResult dni(const std::vector<std::string>& seed_ids, const CascadeLog& test) {
    const std::unordered_set<std::string> seeds(seed_ids.begin(), seed_ids.end());
    std::set<std::string> influenced;
    for (const auto& c : test.cascades) {
        if (!seeds.count(c.initiator()))
            continue;
        for (std::size_t i = 1; i < c.events.size(); ++i)
            influenced.insert(c.events[i].user);
    }
    // the seed influences, it is not influenced
    for (const auto& s : seeds)
        influenced.erase(s);
    DniResult r;
    r.influenced.assign(influenced.begin(), influenced.end());
    return r;
}

std::vector<std::string> avg_cascade_baseline(const CascadeLog& train, int k) {
    if (k < 0 || static_cast<std::size_t>(k) > train.influencers.size())
        throw DataError("k must lie in [0, |I|]");
    struct Acc {
        double participants = 0;
        double cascades = 0;
    };
    std::vector<Acc> acc(train.influencers.size());
    for (const auto& c : train.cascades) {
        const auto it =
            std::lower_bound(train.influencers.begin(), train.influencers.end(), c.initiator());
        auto& a = acc[static_cast<std::size_t>(it - train.influencers.begin())];
        a.participants += static_cast<double>(c.participant_count());
        a.cascades += 1;
    }
    std::vector<std::size_t> order(train.influencers.size());
    for (std::size_t i = 0; i < order.size(); ++i)
        order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double ma = acc[a].participants / acc[a].cascades;
        const double mb = acc[b].participants / acc[b].cascades;
        if (ma != mb)
            return ma > mb;
        return train.influencers[a] < train.influencers[b];
    });
    std::vector<std::string> seeds;
    seeds.reserve(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i)
        seeds.push_back(train.influencers[order[static_cast<std::size_t>(i)]]);
    return seeds;
}

EmbeddingModel concat_models(const std::vector<EmbeddingModel>& models) {
    if (models.empty())
        throw DataError("no models to concatenate");
    const EmbeddingModel& first = models.front();
    for (const auto& m : models) {
        if (m.influencer_ids != first.influencer_ids || m.node_ids != first.node_ids)
            throw DataError("models must share identical influencer and node indices");
        if (m.mode != first.mode)
            throw DataError("models must share the same training mode");
    }
    EmbeddingModel out;
    out.mode = first.mode;
    out.num_influencers = first.num_influencers;
    out.num_nodes = first.num_nodes;
    out.embed_dim = 0;
    for (const auto& m : models)
        out.embed_dim += m.embed_dim;
    out.influencer_ids = first.influencer_ids;
    out.node_ids = first.node_ids;
    out.build_index_maps();

    out.theta.resize(out.num_influencers * out.embed_dim);
    out.tmat.resize(out.num_nodes * out.embed_dim);
    out.umat.resize(out.embed_dim);
    std::size_t offset = 0;
    for (const auto& m : models) {
        for (std::size_t u = 0; u < out.num_influencers; ++u)
            std::copy_n(m.theta.data() + u * m.embed_dim, m.embed_dim,
                        out.theta.data() + u * out.embed_dim + offset);
        for (std::size_t v = 0; v < out.num_nodes; ++v)
            std::copy_n(m.tmat.data() + v * m.embed_dim, m.embed_dim,
                        out.tmat.data() + v * out.embed_dim + offset);
        std::copy_n(m.umat.data(), m.embed_dim, out.umat.data() + offset);
        offset += m.embed_dim;
    }
    out.bias_b.assign(out.num_nodes, 0.0f);
    for (const auto& m : models) {
        for (std::size_t v = 0; v < out.num_nodes; ++v)
            out.bias_b[v] += m.bias_b[v];
        out.bias_c += m.bias_c;
    }
    return out;
}

EvaluationReport sweep(const DatasetSplit& split, const ProfileTable& profiles,
                       const AttributeSchema& schema, const std::vector<std::string>& attrs,
                       const std::vector<SweepModel>& models, const std::vector<int>& k_values,
                       const std::vector<double>& alpha_values, bool include_bias) {
    EvaluationReport report;
    // population of every user observed anywhere, per attribute
    CascadeLog all;
    {
        std::vector<Cascade> cascades = split.train.cascades;
        cascades.insert(cascades.end(), split.validation.cascades.begin(),
                        split.validation.cascades.end());
        cascades.insert(cascades.end(), split.test.cascades.begin(), split.test.cascades.end());
        all = CascadeLog::from_cascades(std::move(cascades));
    }
    std::vector<int> attr_idx;
    std::vector<std::vector<long long>> populations;
    for (const auto& name : attrs) {
        const int a = schema.attribute_index(name);
        if (a < 0)
            throw DataError("unknown attribute '" + name + "'");
        attr_idx.push_back(a);
        populations.push_back(category_population(
            all, profiles, a, schema.attributes[static_cast<std::size_t>(a)].categories.size()));
        report.groups.push_back({name, schema.attributes[static_cast<std::size_t>(a)].categories});
    }

    for (const auto& sm : models) {
        for (std::size_t ai = 0; ai < attrs.size(); ++ai) {
            const auto train_population = category_population(
                split.train, profiles, attr_idx[ai],
                schema.attributes[static_cast<std::size_t>(attr_idx[ai])].categories.size());
            const SelectionInputs inputs = build_selection_inputs(
                *sm.model, split.train, profiles, attr_idx[ai], train_population, include_bias);
            for (const int k : k_values) {
                for (const double alpha : alpha_values) {
                    const auto start = std::chrono::steady_clock::now();
                    const SeedSet seeds = fair_greedy(inputs, k, alpha);
                    std::vector<std::string> seed_ids;
                    for (const auto& s : seeds.seeds)
                        seed_ids.push_back(
                            inputs.influencer_ids[static_cast<std::size_t>(s.influencer)]);
                    const DniResult spread = dni(seed_ids, split.test);
                    const FairnessScore score =
                        spread_fairness(spread.influenced, profiles, attr_idx[ai], populations[ai]);
                    const auto end = std::chrono::steady_clock::now();

                    ReportRow row;
                    row.mode = sm.label;
                    row.attr = attrs[ai];
                    row.k = k;
                    row.alpha = alpha;
                    row.dni = static_cast<long long>(spread.count());
                    row.fairness = score.value;
                    row.group_counts.assign(
                        schema.attributes[static_cast<std::size_t>(attr_idx[ai])].categories.size(),
                        0);
                    for (const auto& user : spread.influenced)
                        ++row.group_counts[static_cast<std::size_t>(
                            profiles.category_of(user, attr_idx[ai]))];
                    row.runtime_ms =
                        std::chrono::duration<double, std::milli>(end - start).count();
                    report.rows.push_back(std::move(row));
                }
            }
        }
    }
    return report;
}

namespace {

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// group_<label> headers in report order; labels qualified on collision
std::vector<std::pair<std::string, std::pair<std::string, std::size_t>>>
group_columns(const EvaluationReport& report) {
    std::vector<std::pair<std::string, std::pair<std::string, std::size_t>>> cols;
    std::unordered_set<std::string> used;
    for (const auto& g : report.groups) {
        for (std::size_t i = 0; i < g.labels.size(); ++i) {
            std::string header = "group_" + g.labels[i];
            if (!used.insert(header).second) {
                header = "group_" + g.attr + "_" + g.labels[i];
                used.insert(header);
            }
            cols.push_back({header, {g.attr, i}});
        }
    }
    return cols;
}

} // namespace

void write_report_csv(const EvaluationReport& report, std::ostream& out) {
    const auto cols = group_columns(report);
    out << "mode,attr,k,alpha,dni,fairness,runtime_ms";
    for (const auto& [header, src] : cols) {
        (void)src;
        out << ',' << header;
    }
    out << '\n';
    for (const auto& row : report.rows) {
        out << row.mode << ',' << row.attr << ',' << row.k << ',' << format_double(row.alpha) << ','
            << row.dni << ',' << format_double(row.fairness) << ','
            << format_double(row.runtime_ms);
        for (const auto& [header, src] : cols) {
            (void)header;
            out << ',';
            if (src.first == row.attr && src.second < row.group_counts.size())
                out << row.group_counts[src.second];
        }
        out << '\n';
    }
}

void write_report_json(const EvaluationReport& report, std::ostream& out) {
    using json = nlohmann::ordered_json;
    json j = json::array();
    for (const auto& row : report.rows) {
        json r;
        r["mode"] = row.mode;
        r["attr"] = row.attr;
        r["k"] = row.k;
        r["alpha"] = row.alpha;
        r["dni"] = row.dni;
        r["fairness"] = row.fairness;
        r["runtime_ms"] = row.runtime_ms;
        for (const auto& g : report.groups) {
            if (g.attr != row.attr)
                continue;
            json counts;
            for (std::size_t i = 0; i < g.labels.size() && i < row.group_counts.size(); ++i)
                counts[g.labels[i]] = row.group_counts[i];
            r["groups"] = std::move(counts);
        }
        j.push_back(std::move(r));
    }
    out << j.dump(2) << '\n';
}

void write_report_svg(const EvaluationReport& report, const std::string& attr,
                      std::ostream& out) {
    constexpr double width = 640, height = 480, margin = 56;
    std::vector<const ReportRow*> rows;
    for (const auto& row : report.rows)
        if (row.attr == attr)
            rows.push_back(&row);

    double x_max = 1;
    for (const auto* row : rows)
        x_max = std::max(x_max, static_cast<double>(row->dni));
    const double x_scale = (width - 2 * margin) / x_max;
    const auto px = [&](double dni_value) { return margin + dni_value * x_scale; };
    const auto py = [&](double fairness) {
        return height - margin - fairness * (height - 2 * margin);
    };

    static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                    "#9467bd", "#8c564b", "#e377c2"};
    std::vector<std::string> modes;
    for (const auto* row : rows)
        if (std::find(modes.begin(), modes.end(), row->mode) == modes.end())
            modes.push_back(row->mode);

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<line x1=\"" << margin << "\" y1=\"" << height - margin << "\" x2=\"" << width - margin
        << "\" y2=\"" << height - margin << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin << "\" y2=\""
        << height - margin << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << width / 2 << "\" y=\"" << height - 12
        << "\" text-anchor=\"middle\" font-size=\"14\">DNI</text>\n";
    out << "<text x=\"16\" y=\"" << height / 2 << "\" text-anchor=\"middle\" font-size=\"14\" "
        << "transform=\"rotate(-90 16 " << height / 2 << ")\">fairness (" << attr
        << ")</text>\n";
    for (int i = 0; i <= 5; ++i) {
        const double f = i / 5.0;
        out << "<text x=\"" << margin - 8 << "\" y=\"" << py(f) + 4
            << "\" text-anchor=\"end\" font-size=\"10\">" << format_double(f) << "</text>\n";
        out << "<text x=\"" << px(x_max * f) << "\" y=\"" << height - margin + 16
            << "\" text-anchor=\"middle\" font-size=\"10\">"
            << static_cast<long long>(std::llround(x_max * f)) << "</text>\n";
    }
    for (const auto* row : rows) {
        const std::size_t mi = static_cast<std::size_t>(
            std::find(modes.begin(), modes.end(), row->mode) - modes.begin());
        out << "<circle cx=\"" << px(static_cast<double>(row->dni)) << "\" cy=\""
            << py(row->fairness) << "\" r=\"4\" fill=\"" << palette[mi % 7]
            << "\" fill-opacity=\"0.8\"><title>" << row->mode << " k=" << row->k
            << " alpha=" << format_double(row->alpha) << "</title></circle>\n";
    }
    for (std::size_t mi = 0; mi < modes.size(); ++mi) {
        const double y = margin + 16 * static_cast<double>(mi);
        out << "<circle cx=\"" << width - margin - 90 << "\" cy=\"" << y << "\" r=\"4\" fill=\""
            << palette[mi % 7] << "\"/>\n";
        out << "<text x=\"" << width - margin - 80 << "\" y=\"" << y + 4
            << "\" font-size=\"12\">" << modes[mi] << "</text>\n";
    }
    out << "</svg>\n";
}

} // namespace fim
