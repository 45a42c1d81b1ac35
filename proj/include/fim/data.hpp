#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace fim {

// Ordered categorical attributes. Category index = position in `categories`.
struct AttributeSchema {
    struct Attribute {
        std::string name;
        std::vector<std::string> categories;
    };
    std::vector<Attribute> attributes;

    int attribute_index(const std::string& name) const;
    const Attribute& attribute(const std::string& name) const;
    void validate() const;
};

// user id -> category index per schema attribute, in schema order.
struct ProfileTable {
    std::vector<std::string> users; // insertion order, for deterministic output
    std::unordered_map<std::string, std::vector<int>> entries;

    const std::vector<int>* find(const std::string& user) const;
    // Throws DataError when the user is missing.
    int category_of(const std::string& user, int attr) const;
    void insert(const std::string& user, std::vector<int> categories);
};

struct CascadeEvent {
    std::string user;
    std::int64_t time = 0;
};

// Events sorted by non-decreasing timestamp; events[0] is the initiator and is
// the unique minimum-timestamp event. User ids are unique within a cascade.
struct Cascade {
    std::string id;
    std::vector<CascadeEvent> events;

    const std::string& initiator() const { return events.front().user; }
    std::int64_t start_time() const { return events.front().time; }
    std::size_t participant_count() const { return events.size() - 1; }
};

struct CascadeLog {
    std::vector<Cascade> cascades;
    std::vector<std::string> influencers; // sorted unique initiator ids
    std::vector<std::string> nodes;       // sorted unique ids of every event

    static CascadeLog from_cascades(std::vector<Cascade> cascades);
    bool is_influencer(const std::string& id) const;
};

struct DatasetSplit {
    CascadeLog train;
    CascadeLog validation;
    CascadeLog test;
};

enum class CascadeFormat { Jsonl, Tsv };

// Normalizes event order, dedupes re-shares (earliest event wins) and checks
// the cascade invariants. Throws ParseError with a line number on bad input.
CascadeLog parse_cascade_log(std::istream& in, CascadeFormat format);
void write_cascade_jsonl(const CascadeLog& log, std::ostream& out);
void write_cascade_tsv(const CascadeLog& log, std::ostream& out);

ProfileTable parse_profiles(std::istream& in, const AttributeSchema& schema);
void write_profiles_tsv(const ProfileTable& profiles, const AttributeSchema& schema,
                        std::ostream& out);

// One attribute per line: `gender=male,female`.
AttributeSchema parse_schema(std::istream& in);
void write_schema(const AttributeSchema& schema, std::ostream& out);

// Sorts cascades by (initiation time, cascade id) and assigns floor(r*n) to
// train and validation, remainder to test.
DatasetSplit split_by_time(const CascadeLog& log, double train_ratio, double val_ratio,
                           double test_ratio);

// Appends a derived attribute whose category index is the mixed-radix encoding
// of the component indices, and re-indexes every profile row. Returns the new
// attribute's index.
int combine_attributes(AttributeSchema& schema, ProfileTable& profiles,
                       const std::vector<std::string>& names);

// Inverse of the mixed-radix encoding used by combine_attributes.
std::vector<int> decode_combined_index(const AttributeSchema& schema, int attr,
                                       int combined_index,
                                       const std::vector<std::string>& names);

struct DatasetStats {
    std::size_t influencer_count = 0;
    std::size_t node_count = 0;
    std::size_t cascade_count = 0;
    double median_cascade_size = 0; // undefined (flagged) when there are no cascades
    std::size_t max_cascade_size = 0;
    bool median_defined = false;
};

DatasetStats dataset_stats(const CascadeLog& log);

} // namespace fim
