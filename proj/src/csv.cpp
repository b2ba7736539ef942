#include "recsmith/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <unordered_map>

#include "recsmith/error.hpp"

namespace recsmith {

namespace {

// days since 1970-01-01 for a civil date (proleptic Gregorian)
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

bool parse_int(const std::string& s, std::size_t from, std::size_t len, std::int64_t& out) {
    if (from + len > s.size()) return false;
    const char* first = s.data() + from;
    auto [ptr, ec] = std::from_chars(first, first + len, out);
    return ec == std::errc() && ptr == first + len;
}

[[noreturn]] void bad_timestamp(const std::string& text) {
    raise(ErrorCode::ParseError, "cannot parse timestamp '" + text +
                                     "' (expected epoch seconds or YYYY-MM-DD[ HH:MM:SS])");
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorCode::IoError, "cannot open '" + path + "' for reading");
    return in;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) raise(ErrorCode::IoError, "cannot open '" + path + "' for writing");
    return out;
}

// header name -> position; required names must all be present
std::unordered_map<std::string, std::size_t> index_header(const std::vector<std::string>& header,
                                                          const std::string& path) {
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < header.size(); ++i) index.emplace(header[i], i);
    if (index.empty()) raise(ErrorCode::ParseError, "'" + path + "' has an empty header row");
    return index;
}

std::size_t require_column(const std::unordered_map<std::string, std::size_t>& index,
                           const std::string& name, const std::string& path) {
    auto it = index.find(name);
    if (it == index.end()) {
        raise(ErrorCode::MissingColumn, "'" + path + "' has no column '" + name + "'");
    }
    return it->second;
}

double parse_rating(const std::string& text, const std::string& path, std::size_t line) {
    double value;
    const char* first = text.data();
    auto [ptr, ec] = std::from_chars(first, first + text.size(), value);
    if (ec != std::errc() || ptr != first + text.size()) {
        raise(ErrorCode::ParseError,
              path + ":" + std::to_string(line) + ": bad rating '" + text + "'");
    }
    return value;
}

bool next_record(std::ifstream& in, std::string& line) {
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) return true;
    }
    return false;
}

// RFC-4180 quoting for single-character delimiters; verbatim otherwise.
std::string escape_field(const std::string& field, const std::string& delimiter) {
    if (delimiter.size() != 1) return field;
    if (field.find(delimiter[0]) == std::string::npos && field.find('"') == std::string::npos) {
        return field;
    }
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

}  // namespace

std::int64_t parse_timestamp(const std::string& text) {
    std::int64_t epoch;
    if (parse_int(text, 0, text.size(), epoch)) return epoch;

    // YYYY-MM-DD, optionally followed by " HH:MM:SS"
    if (text.size() != 10 && text.size() != 19) bad_timestamp(text);
    std::int64_t y, mo, d, h = 0, mi = 0, s = 0;
    if (!parse_int(text, 0, 4, y) || text[4] != '-' || !parse_int(text, 5, 2, mo) ||
        text[7] != '-' || !parse_int(text, 8, 2, d)) {
        bad_timestamp(text);
    }
    if (text.size() == 19) {
        if (text[10] != ' ' || !parse_int(text, 11, 2, h) || text[13] != ':' ||
            !parse_int(text, 14, 2, mi) || text[16] != ':' || !parse_int(text, 17, 2, s)) {
            bad_timestamp(text);
        }
    }
    if (mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || s > 59) bad_timestamp(text);
    return days_from_civil(y, static_cast<unsigned>(mo), static_cast<unsigned>(d)) * 86400 +
           h * 3600 + mi * 60 + s;
}

std::string format_double(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    (void)ec;
    return std::string(buf, ptr);
}

std::vector<std::string> split_csv_line(const std::string& line, const std::string& delimiter) {
    std::vector<std::string> fields;
    if (delimiter.size() != 1) {
        std::size_t pos = 0;
        for (;;) {
            const std::size_t hit = line.find(delimiter, pos);
            if (hit == std::string::npos) {
                fields.push_back(line.substr(pos));
                return fields;
            }
            fields.push_back(line.substr(pos, hit - pos));
            pos = hit + delimiter.size();
        }
    }

    const char sep = delimiter[0];
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"' && field.empty()) {
            quoted = true;
        } else if (c == sep) {
            fields.push_back(std::move(field));
            field.clear();
        } else {
            field.push_back(c);
        }
    }
    fields.push_back(std::move(field));
    return fields;
}

InteractionLog read_interactions_csv(const std::string& path, const ColumnMap& columns,
                                     const std::string& delimiter) {
    std::ifstream in = open_input(path);
    std::string line;
    if (!next_record(in, line)) raise(ErrorCode::ParseError, "'" + path + "' is empty");
    const auto index = index_header(split_csv_line(line, delimiter), path);

    const std::size_t qi = require_column(index, columns.query, path);
    const std::size_t ii = require_column(index, columns.item, path);
    const std::size_t ti = require_column(index, columns.timestamp, path);
    std::optional<std::size_t> ri;
    if (columns.rating) ri = require_column(index, *columns.rating, path);

    InteractionLog log;
    std::size_t line_no = 1;
    while (next_record(in, line)) {
        ++line_no;
        const auto fields = split_csv_line(line, delimiter);
        const std::size_t needed = std::max({qi, ii, ti, ri.value_or(0)});
        if (fields.size() <= needed) {
            raise(ErrorCode::ParseError,
                  path + ":" + std::to_string(line_no) + ": expected at least " +
                      std::to_string(needed + 1) + " fields, got " +
                      std::to_string(fields.size()));
        }
        const double rating = ri ? parse_rating(fields[*ri], path, line_no) : 1.0;
        log.push_back(fields[qi], fields[ii], parse_timestamp(fields[ti]), rating);
    }
    return log;
}

void write_interactions_csv(const std::string& path, const InteractionLog& log,
                            const ColumnMap& columns, const std::string& delimiter) {
    std::ofstream out = open_output(path);
    out << columns.query << delimiter << columns.item << delimiter << columns.timestamp;
    if (columns.rating) out << delimiter << *columns.rating;
    out << '\n';
    for (std::size_t r = 0; r < log.size(); ++r) {
        out << escape_field(log.queries[r], delimiter) << delimiter
            << escape_field(log.items[r], delimiter) << delimiter << log.timestamps[r];
        if (columns.rating) out << delimiter << format_double(log.ratings[r]);
        out << '\n';
    }
    if (!out) raise(ErrorCode::IoError, "failed writing '" + path + "'");
}

FeatureTable read_feature_table_csv(const std::string& path, const std::string& key_column,
                                    const std::vector<std::string>& categorical,
                                    const std::vector<std::string>& numerical,
                                    const std::string& delimiter) {
    std::ifstream in = open_input(path);
    std::string line;
    if (!next_record(in, line)) raise(ErrorCode::ParseError, "'" + path + "' is empty");
    const auto index = index_header(split_csv_line(line, delimiter), path);

    const std::size_t key = require_column(index, key_column, path);
    FeatureTable table;
    std::vector<std::size_t> positions;
    for (const auto& name : categorical) {
        positions.push_back(require_column(index, name, path));
        table.columns.push_back({name, FeatureType::Categorical, {}, {}});
    }
    for (const auto& name : numerical) {
        positions.push_back(require_column(index, name, path));
        table.columns.push_back({name, FeatureType::Numerical, {}, {}});
    }

    std::size_t line_no = 1;
    while (next_record(in, line)) {
        ++line_no;
        const auto fields = split_csv_line(line, delimiter);
        std::size_t needed = key;
        for (std::size_t p : positions) needed = std::max(needed, p);
        if (fields.size() <= needed) {
            raise(ErrorCode::ParseError, path + ":" + std::to_string(line_no) + ": short row");
        }
        table.keys.push_back(fields[key]);
        for (std::size_t c = 0; c < table.columns.size(); ++c) {
            auto& col = table.columns[c];
            if (col.type == FeatureType::Categorical) {
                col.categorical.push_back(fields[positions[c]]);
            } else {
                col.numerical.push_back(parse_rating(fields[positions[c]], path, line_no));
            }
        }
    }
    return table;
}

void write_recommendations_csv(const std::string& path, const RawRecommendations& recs) {
    std::ofstream out = open_output(path);
    out << "query_id,item_id,rank,score\n";
    for (std::size_t g = 0; g < recs.queries.size(); ++g) {
        int rank = 0;
        for (const auto& entry : recs.entries[g]) {
            out << escape_field(recs.queries[g], ",") << ',' << escape_field(entry.item, ",")
                << ',' << ++rank << ',' << format_double(entry.score) << '\n';
        }
    }
    if (!out) raise(ErrorCode::IoError, "failed writing '" + path + "'");
}

RawRecommendations read_recommendations_csv(const std::string& path) {
    std::ifstream in = open_input(path);
    std::string line;
    if (!next_record(in, line)) raise(ErrorCode::ParseError, "'" + path + "' is empty");
    const auto index = index_header(split_csv_line(line, ","), path);
    const std::size_t qi = require_column(index, "query_id", path);
    const std::size_t ii = require_column(index, "item_id", path);
    const std::size_t si = require_column(index, "score", path);

    RawRecommendations recs;
    std::unordered_map<std::string, std::size_t> group_of;
    std::size_t line_no = 1;
    while (next_record(in, line)) {
        ++line_no;
        const auto fields = split_csv_line(line, ",");
        const std::size_t needed = std::max({qi, ii, si});
        if (fields.size() <= needed) {
            raise(ErrorCode::ParseError, path + ":" + std::to_string(line_no) + ": short row");
        }
        auto [it, added] = group_of.try_emplace(fields[qi], recs.queries.size());
        if (added) {
            recs.queries.push_back(fields[qi]);
            recs.entries.emplace_back();
        }
        recs.entries[it->second].push_back(
            {fields[ii], parse_rating(fields[si], path, line_no)});
    }
    for (const auto& list : recs.entries) {
        recs.k = std::max(recs.k, static_cast<int>(list.size()));
    }
    return recs;
}

}  // namespace recsmith
