#include "fim/data.hpp"

#include "fim/errors.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <nlohmann/json.hpp>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_set>

namespace fim {

namespace {

using json = nlohmann::ordered_json;

std::vector<std::string> split_on(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = s.find(sep, start);
        if (pos == std::string::npos) {
            parts.push_back(s.substr(start));
            break;
        }
        parts.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
    return parts;
}

// Sorts events, keeps the earliest event per user, checks invariants.
void normalize_cascade(Cascade& c, long line) {
    if (c.events.empty())
        throw ParseError("empty cascade '" + c.id + "'", line);
    std::stable_sort(c.events.begin(), c.events.end(),
                     [](const CascadeEvent& a, const CascadeEvent& b) { return a.time < b.time; });
    std::unordered_set<std::string> seen;
    std::vector<CascadeEvent> kept;
    kept.reserve(c.events.size());
    for (auto& e : c.events) {
        if (seen.insert(e.user).second)
            kept.push_back(std::move(e));
    }
    c.events = std::move(kept);
    if (c.events.size() > 1 && c.events[1].time == c.events[0].time)
        throw ParseError("cascade '" + c.id + "' has no unique initiator (timestamp tie at minimum)",
                         line);
}

Cascade parse_jsonl_cascade(const std::string& text, long line) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed JSON: ") + e.what(), line);
    }
    if (!j.is_object() || !j.contains("id") || !j.contains("events"))
        throw ParseError("cascade object must have 'id' and 'events'", line);
    Cascade c;
    c.id = j.at("id").get<std::string>();
    for (const auto& ev : j.at("events")) {
        if (!ev.is_array() || ev.size() != 2 || !ev[0].is_string() || !ev[1].is_number_integer())
            throw ParseError("event must be [user_id, integer_timestamp]", line);
        c.events.push_back({ev[0].get<std::string>(), ev[1].get<std::int64_t>()});
    }
    return c;
}

Cascade parse_tsv_cascade(const std::string& text, long line) {
    const auto fields = split_on(text, '\t');
    if (fields.size() < 2)
        throw ParseError("expected cascade_id<TAB>user,time...", line);
    Cascade c;
    c.id = fields[0];
    for (std::size_t i = 1; i < fields.size(); ++i) {
        const auto pair = split_on(fields[i], ',');
        if (pair.size() != 2 || pair[0].empty())
            throw ParseError("expected user,time pair, got '" + fields[i] + "'", line);
        try {
            std::size_t used = 0;
            const std::int64_t t = std::stoll(pair[1], &used);
            if (used != pair[1].size())
                throw std::invalid_argument("trailing");
            c.events.push_back({pair[0], t});
        } catch (const std::exception&) {
            throw ParseError("bad timestamp '" + pair[1] + "'", line);
        }
    }
    return c;
}

} // namespace

int AttributeSchema::attribute_index(const std::string& name) const {
    for (std::size_t i = 0; i < attributes.size(); ++i)
        if (attributes[i].name == name)
            return static_cast<int>(i);
    return -1;
}

const AttributeSchema::Attribute& AttributeSchema::attribute(const std::string& name) const {
    const int i = attribute_index(name);
    if (i < 0)
        throw DataError("unknown attribute '" + name + "'");
    return attributes[static_cast<std::size_t>(i)];
}

void AttributeSchema::validate() const {
    std::unordered_set<std::string> names;
    for (const auto& a : attributes) {
        if (!names.insert(a.name).second)
            throw DataError("duplicate attribute '" + a.name + "'");
        if (a.categories.size() < 2)
            throw DataError("attribute '" + a.name + "' needs at least 2 categories");
        std::unordered_set<std::string> cats;
        for (const auto& c : a.categories)
            if (!cats.insert(c).second)
                throw DataError("duplicate category '" + c + "' in attribute '" + a.name + "'");
    }
}

const std::vector<int>* ProfileTable::find(const std::string& user) const {
    const auto it = entries.find(user);
    return it == entries.end() ? nullptr : &it->second;
}

int ProfileTable::category_of(const std::string& user, int attr) const {
    const auto* row = find(user);
    if (!row)
        throw DataError("user '" + user + "' has no profile");
    return (*row)[static_cast<std::size_t>(attr)];
}

void ProfileTable::insert(const std::string& user, std::vector<int> categories) {
    const auto [it, inserted] = entries.emplace(user, std::move(categories));
    (void)it;
    if (!inserted)
        throw DataError("duplicate user '" + user + "'");
    users.push_back(user);
}

CascadeLog CascadeLog::from_cascades(std::vector<Cascade> cascades) {
    CascadeLog log;
    log.cascades = std::move(cascades);
    std::set<std::string> inf, all;
    for (const auto& c : log.cascades) {
        inf.insert(c.initiator());
        for (const auto& e : c.events)
            all.insert(e.user);
    }
    log.influencers.assign(inf.begin(), inf.end());
    log.nodes.assign(all.begin(), all.end());
    return log;
}

bool CascadeLog::is_influencer(const std::string& id) const {
    return std::binary_search(influencers.begin(), influencers.end(), id);
}

CascadeLog parse_cascade_log(std::istream& in, CascadeFormat format) {
    std::vector<Cascade> cascades;
    std::unordered_set<std::string> ids;
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        Cascade c = format == CascadeFormat::Jsonl ? parse_jsonl_cascade(line, lineno)
                                                   : parse_tsv_cascade(line, lineno);
        normalize_cascade(c, lineno);
        if (!ids.insert(c.id).second)
            throw ParseError("duplicate cascade id '" + c.id + "'", lineno);
        cascades.push_back(std::move(c));
    }
    return CascadeLog::from_cascades(std::move(cascades));
}

void write_cascade_jsonl(const CascadeLog& log, std::ostream& out) {
    for (const auto& c : log.cascades) {
        json j;
        j["id"] = c.id;
        auto& events = j["events"] = json::array();
        for (const auto& e : c.events)
            events.push_back(json::array({e.user, e.time}));
        out << j.dump() << '\n';
    }
}

void write_cascade_tsv(const CascadeLog& log, std::ostream& out) {
    for (const auto& c : log.cascades) {
        out << c.id;
        for (const auto& e : c.events)
            out << '\t' << e.user << ',' << e.time;
        out << '\n';
    }
}

ProfileTable parse_profiles(std::istream& in, const AttributeSchema& schema) {
    std::string line;
    if (!std::getline(in, line))
        throw ParseError("missing header row", 1);
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    const auto header = split_on(line, '\t');
    if (header.empty() || header[0] != "user_id")
        throw ParseError("first column must be user_id", 1);
    std::vector<int> column_attr(header.size() - 1);
    for (std::size_t i = 1; i < header.size(); ++i) {
        const int a = schema.attribute_index(header[i]);
        if (a < 0)
            throw ParseError("unknown attribute column '" + header[i] + "'", 1);
        column_attr[i - 1] = a;
    }
    for (const auto& attr : schema.attributes)
        if (std::find(header.begin() + 1, header.end(), attr.name) == header.end())
            throw ParseError("missing column for attribute '" + attr.name + "'", 1);

    ProfileTable table;
    long lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        const auto fields = split_on(line, '\t');
        if (fields.size() != header.size())
            throw ParseError("expected " + std::to_string(header.size()) + " columns, got " +
                                 std::to_string(fields.size()),
                             lineno);
        std::vector<int> row(schema.attributes.size(), -1);
        for (std::size_t i = 1; i < fields.size(); ++i) {
            const int a = column_attr[i - 1];
            const auto& attr = schema.attributes[static_cast<std::size_t>(a)];
            const auto it = std::find(attr.categories.begin(), attr.categories.end(), fields[i]);
            if (it == attr.categories.end())
                throw ParseError("unknown label '" + fields[i] + "' for attribute '" + attr.name +
                                     "'",
                                 lineno);
            row[static_cast<std::size_t>(a)] =
                static_cast<int>(it - attr.categories.begin());
        }
        try {
            table.insert(fields[0], std::move(row));
        } catch (const DataError& e) {
            throw ParseError(e.what(), lineno);
        }
    }
    return table;
}

void write_profiles_tsv(const ProfileTable& profiles, const AttributeSchema& schema,
                        std::ostream& out) {
    out << "user_id";
    for (const auto& a : schema.attributes)
        out << '\t' << a.name;
    out << '\n';
    for (const auto& user : profiles.users) {
        const auto& row = profiles.entries.at(user);
        out << user;
        for (std::size_t a = 0; a < schema.attributes.size(); ++a)
            out << '\t' << schema.attributes[a].categories[static_cast<std::size_t>(row[a])];
        out << '\n';
    }
}

AttributeSchema parse_schema(std::istream& in) {
    AttributeSchema schema;
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty() || line[0] == '#')
            continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError("expected name=cat1,cat2,...", lineno);
        AttributeSchema::Attribute attr;
        attr.name = line.substr(0, eq);
        attr.categories = split_on(line.substr(eq + 1), ',');
        schema.attributes.push_back(std::move(attr));
    }
    schema.validate();
    return schema;
}

void write_schema(const AttributeSchema& schema, std::ostream& out) {
    for (const auto& a : schema.attributes) {
        out << a.name << '=';
        for (std::size_t i = 0; i < a.categories.size(); ++i)
            out << (i ? "," : "") << a.categories[i];
        out << '\n';
    }
}

DatasetSplit split_by_time(const CascadeLog& log, double train_ratio, double val_ratio,
                           double test_ratio) {
    if (train_ratio <= 0 || val_ratio <= 0 || test_ratio <= 0)
        throw DataError("split ratios must be positive");
    if (std::abs(train_ratio + val_ratio + test_ratio - 1.0) > 1e-9)
        throw DataError("split ratios must sum to 1");
    const std::size_t n = log.cascades.size();
    if (n < 3)
        throw DataError("need at least 3 cascades to split");

    std::vector<Cascade> sorted = log.cascades;
    std::sort(sorted.begin(), sorted.end(), [](const Cascade& a, const Cascade& b) {
        if (a.start_time() != b.start_time())
            return a.start_time() < b.start_time();
        return a.id < b.id;
    });
    const std::size_t n_train = static_cast<std::size_t>(std::floor(train_ratio * n));
    const std::size_t n_val = static_cast<std::size_t>(std::floor(val_ratio * n));

    DatasetSplit split;
    split.train = CascadeLog::from_cascades(
        {sorted.begin(), sorted.begin() + static_cast<long>(n_train)});
    split.validation = CascadeLog::from_cascades({sorted.begin() + static_cast<long>(n_train),
                                                  sorted.begin() + static_cast<long>(n_train + n_val)});
    split.test = CascadeLog::from_cascades(
        {sorted.begin() + static_cast<long>(n_train + n_val), sorted.end()});
    return split;
}

int combine_attributes(AttributeSchema& schema, ProfileTable& profiles,
                       const std::vector<std::string>& names) {
    if (names.empty())
        throw DataError("no attributes to combine");
    std::vector<int> parts;
    std::unordered_set<std::string> seen;
    for (const auto& name : names) {
        if (!seen.insert(name).second)
            throw DataError("duplicate attribute '" + name + "' in combination");
        const int a = schema.attribute_index(name);
        if (a < 0)
            throw DataError("unknown attribute '" + name + "'");
        parts.push_back(a);
    }
    if (parts.size() == 1)
        return parts[0]; // identity, nothing to derive

    AttributeSchema::Attribute derived;
    for (std::size_t i = 0; i < names.size(); ++i)
        derived.name += (i ? "_" : "") + names[i];
    if (schema.attribute_index(derived.name) >= 0)
        throw DataError("attribute '" + derived.name + "' already exists");
    // Mixed-radix encoding, first component is the most significant digit.
    std::size_t total = 1;
    for (const int a : parts)
        total *= schema.attributes[static_cast<std::size_t>(a)].categories.size();
    derived.categories.reserve(total);
    for (std::size_t code = 0; code < total; ++code) {
        std::size_t rem = code;
        std::vector<std::string> labels(parts.size());
        for (std::size_t i = parts.size(); i-- > 0;) {
            const auto& cats = schema.attributes[static_cast<std::size_t>(parts[i])].categories;
            labels[i] = cats[rem % cats.size()];
            rem /= cats.size();
        }
        std::string label;
        for (std::size_t i = 0; i < labels.size(); ++i)
            label += (i ? "_" : "") + labels[i];
        derived.categories.push_back(std::move(label));
    }

    for (auto& [user, row] : profiles.entries) {
        (void)user;
        int code = 0;
        for (const int a : parts) {
            const auto& cats = schema.attributes[static_cast<std::size_t>(a)].categories;
            code = code * static_cast<int>(cats.size()) + row[static_cast<std::size_t>(a)];
        }
        row.push_back(code);
    }
    schema.attributes.push_back(std::move(derived));
    return static_cast<int>(schema.attributes.size()) - 1;
}

std::vector<int> decode_combined_index(const AttributeSchema& schema, int attr,
                                       int combined_index,
                                       const std::vector<std::string>& names) {
    (void)attr;
    std::vector<int> digits(names.size());
    std::size_t rem = static_cast<std::size_t>(combined_index);
    for (std::size_t i = names.size(); i-- > 0;) {
        const auto& cats = schema.attribute(names[i]).categories;
        digits[i] = static_cast<int>(rem % cats.size());
        rem /= cats.size();
    }
    return digits;
}

DatasetStats dataset_stats(const CascadeLog& log) {
    DatasetStats s;
    s.influencer_count = log.influencers.size();
    s.node_count = log.nodes.size();
    s.cascade_count = log.cascades.size();
    if (log.cascades.empty())
        return s;
    std::vector<std::size_t> sizes;
    sizes.reserve(log.cascades.size());
    for (const auto& c : log.cascades)
        sizes.push_back(c.events.size());
    std::sort(sizes.begin(), sizes.end());
    s.max_cascade_size = sizes.back();
    const std::size_t n = sizes.size();
    s.median_cascade_size = n % 2 ? static_cast<double>(sizes[n / 2])
                                  : (static_cast<double>(sizes[n / 2 - 1]) +
                                     static_cast<double>(sizes[n / 2])) /
                                        2.0;
    s.median_defined = true;
    return s;
}

} // namespace fim
