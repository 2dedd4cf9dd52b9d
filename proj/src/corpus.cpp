#include "eqn/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

#include <fmt/format.h>

#include "eqn/csv.hpp"
#include "eqn/error.hpp"

namespace eqn {

namespace {

std::string_view trim(std::string_view s) {
    auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

struct HeaderLayout {
    std::size_t text = 0;
    std::size_t labels = 0;
    std::optional<std::size_t> id;
    std::vector<std::size_t> label_columns;
    std::vector<std::string> label_names;
};

HeaderLayout inspect_header(const csv::Row& header, const std::string& path) {
    HeaderLayout layout;
    std::optional<std::size_t> text;
    std::optional<std::size_t> labels;
    for (std::size_t c = 0; c < header.size(); ++c) {
        std::string_view name = trim(header[c]);
        if (name == "text" && !text) {
            text = c;
        } else if (name == "labels" && !labels) {
            labels = c;
        } else if (name == "id" && !layout.id) {
            layout.id = c;
        } else {
            layout.label_columns.push_back(c);
            layout.label_names.emplace_back(name);
        }
    }
    if (!text || !labels) {
        throw DataError(fmt::format("{}: header must contain 'text' and 'labels' columns", path));
    }
    layout.text = *text;
    layout.labels = *labels;
    return layout;
}

double parse_intensity(std::string_view field, const std::string& path, std::size_t line,
                       std::string_view label) {
    field = trim(field);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (field.empty() || ec != std::errc{} || ptr != field.data() + field.size()) {
        throw DataError(fmt::format("{}: row at line {}: non-numeric intensity '{}' for label '{}'",
                                    path, line, field, label));
    }
    if (!std::isfinite(value) || value < kMinIntensity || value > kMaxIntensity) {
        throw DataError(fmt::format("{}: row at line {}: intensity {} for label '{}' outside [0,10]",
                                    path, line, field, label));
    }
    return value;
}

std::string row_id(const HeaderLayout& layout, const csv::Record& rec, std::size_t row_number) {
    if (layout.id && !rec.fields[*layout.id].empty()) return rec.fields[*layout.id];
    return fmt::format("row{}", row_number);
}

Dataset load_compact_records(const std::vector<csv::Record>& records, const HeaderLayout& layout,
                             const LabelVocabulary& vocab, Split split, const std::string& path) {
    const std::size_t columns = records.front().fields.size();
    Dataset ds{vocab, {}, split};
    ds.samples.reserve(records.size() - 1);
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& rec = records[r];
        if (rec.fields.size() != columns) {
            throw DataError(fmt::format("{}: data row {} (line {}) has {} columns, expected {}", path,
                                        r, rec.line, rec.fields.size(), columns));
        }
        Sample s;
        s.id = row_id(layout, rec, r);
        s.text = rec.fields[layout.text];
        try {
            s.gold = parse_label_list(rec.fields[layout.labels], vocab.size());
        } catch (const DataError& e) {
            throw DataError(fmt::format("{}: data row {} (line {}): {}", path, r, rec.line, e.what()));
        }
        ds.samples.push_back(std::move(s));
    }
    return ds;
}

}  // namespace

LabelVocabulary::LabelVocabulary(std::vector<std::string> names) : names_(std::move(names)) {
    if (names_.size() < 2) throw DataError("label vocabulary needs at least two labels");
    for (std::size_t j = 0; j < names_.size(); ++j) {
        if (names_[j].empty()) throw DataError(fmt::format("label {} has an empty name", j));
        if (!index_.emplace(names_[j], j).second) {
            throw DataError(fmt::format("duplicate label name '{}'", names_[j]));
        }
    }
}

LabelVocabulary LabelVocabulary::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open vocabulary file: " + path);
    std::vector<std::string> names;
    std::string line;
    while (std::getline(in, line)) {
        auto name = trim(line);
        if (!name.empty()) names.emplace_back(name);
    }
    return LabelVocabulary(std::move(names));
}

std::optional<LabelIndex> LabelVocabulary::index(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::string_view to_string(Split split) {
    switch (split) {
        case Split::train: return "train";
        case Split::test: return "test";
        case Split::validation: return "validation";
        case Split::unlabeled: return "unlabeled";
    }
    return "unknown";
}

LabelSet parse_label_list(std::string_view field, std::size_t label_count) {
    LabelSet out;
    field = trim(field);
    if (field.empty()) return out;
    std::size_t start = 0;
    while (start <= field.size()) {
        std::size_t comma = field.find(',', start);
        if (comma == std::string_view::npos) comma = field.size();
        std::string_view item = trim(field.substr(start, comma - start));
        std::size_t value = 0;
        auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), value);
        if (item.empty() || ec != std::errc{} || ptr != item.data() + item.size()) {
            throw DataError(fmt::format("invalid label index '{}'", item));
        }
        if (value >= label_count) {
            throw DataError(fmt::format("label index {} out of range (label count {})", value,
                                        label_count));
        }
        out.push_back(value);
        start = comma + 1;
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::string format_label_list(const LabelSet& labels) {
    return fmt::format("{}", fmt::join(labels, ","));
}

void validate_sample(const Sample& sample, const LabelVocabulary& vocab) {
    for (LabelIndex j : sample.gold) {
        if (j >= vocab.size()) {
            throw DataError(fmt::format("sample '{}': label index {} out of range", sample.id, j));
        }
    }
    if (!std::is_sorted(sample.gold.begin(), sample.gold.end()) ||
        std::adjacent_find(sample.gold.begin(), sample.gold.end()) != sample.gold.end()) {
        throw DataError(fmt::format("sample '{}': gold set not sorted and unique", sample.id));
    }
    if (sample.intensities) {
        if (sample.intensities->size() != vocab.size()) {
            throw DataError(fmt::format("sample '{}': {} intensities for {} labels", sample.id,
                                        sample.intensities->size(), vocab.size()));
        }
        for (double v : *sample.intensities) {
            if (!std::isfinite(v) || v < kMinIntensity || v > kMaxIntensity) {
                throw DataError(fmt::format("sample '{}': intensity {} outside [0,10]", sample.id, v));
            }
        }
    }
}

Dataset load_compact(const std::string& path, const LabelVocabulary& vocab, Split split) {
    auto records = csv::read_file(path);
    if (records.empty()) throw DataError(path + ": missing header row");
    auto layout = inspect_header(records.front().fields, path);
    if (!layout.label_columns.empty()) {
        throw DataError(fmt::format("{}: unexpected column '{}' in compact layout", path,
                                    layout.label_names.front()));
    }
    if (records.size() < 2) throw DataError(path + ": no data rows");
    return load_compact_records(records, layout, vocab, split, path);
}

Dataset load_full(const std::string& path, const LabelVocabulary* expected, Split split) {
    auto records = csv::read_file(path);
    if (records.empty()) throw DataError(path + ": missing header row");
    auto layout = inspect_header(records.front().fields, path);
    if (layout.label_columns.empty()) {
        throw DataError(fmt::format(
            "{}: no intensity columns (expected text, labels, then one column per label)", path));
    }
    if (expected != nullptr) {
        for (const auto& name : layout.label_names) {
            if (!expected->index(name)) {
                throw DataError(fmt::format("{}: unknown label column '{}'", path, name));
            }
        }
        if (layout.label_names != expected->names()) {
            throw DataError(fmt::format("{}: label columns do not match the vocabulary order", path));
        }
    }
    LabelVocabulary vocab(layout.label_names);
    if (records.size() < 2) throw DataError(path + ": no data rows");

    const std::size_t columns = records.front().fields.size();
    Dataset ds{vocab, {}, split};
    ds.samples.reserve(records.size() - 1);
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& rec = records[r];
        if (rec.fields.size() != columns) {
            throw DataError(fmt::format("{}: data row {} (line {}) has {} columns, expected {}", path,
                                        r, rec.line, rec.fields.size(), columns));
        }
        Sample s;
        s.id = row_id(layout, rec, r);
        s.text = rec.fields[layout.text];
        try {
            s.gold = parse_label_list(rec.fields[layout.labels], vocab.size());
        } catch (const DataError& e) {
            throw DataError(fmt::format("{}: data row {} (line {}): {}", path, r, rec.line, e.what()));
        }
        IntensityVector values(vocab.size());
        for (std::size_t j = 0; j < vocab.size(); ++j) {
            values[j] = parse_intensity(rec.fields[layout.label_columns[j]], path, rec.line,
                                        vocab.name(j));
        }
        s.intensities = std::move(values);
        ds.samples.push_back(std::move(s));
    }
    return ds;
}

Dataset load_any(const std::string& path, const LabelVocabulary* vocab, Split split) {
    auto records = csv::read_file(path);
    if (records.empty()) throw DataError(path + ": missing header row");
    auto layout = inspect_header(records.front().fields, path);
    if (!layout.label_columns.empty()) return load_full(path, vocab, split);
    if (vocab == nullptr) {
        throw DataError(path + ": compact layout needs a label vocabulary (--vocab)");
    }
    if (records.size() < 2) throw DataError(path + ": no data rows");
    return load_compact_records(records, layout, *vocab, split, path);
}

std::string format_full(const Dataset& ds) {
    std::string out = "text,labels";
    for (const auto& name : ds.vocab.names()) {
        out += ',';
        out += csv::quote_if_needed(name);
    }
    out += '\n';
    for (const auto& s : ds.samples) {
        if (!s.intensities) {
            throw DataError(fmt::format("sample '{}' has no intensities to write", s.id));
        }
        if (s.intensities->size() != ds.vocab.size()) {
            throw DataError(fmt::format("sample '{}': {} intensities for {} labels", s.id,
                                        s.intensities->size(), ds.vocab.size()));
        }
        out += csv::quote(s.text);
        out += ',';
        out += csv::quote(format_label_list(s.gold));
        for (double v : *s.intensities) {
            // Normalize -0.0 so identical values always print identically.
            if (v == 0.0) v = 0.0;
            out += fmt::format(",{:.2f}", v);
        }
        out += '\n';
    }
    return out;
}

void emit_full(const Dataset& ds, const std::string& path) { csv::write_file(path, format_full(ds)); }

std::string format_compact(const Dataset& ds) {
    std::string out = "text,labels,id\n";
    for (const auto& s : ds.samples) {
        out += csv::quote(s.text);
        out += ',';
        out += csv::quote(format_label_list(s.gold));
        out += ',';
        out += csv::quote(s.id);
        out += '\n';
    }
    return out;
}

void emit_compact(const Dataset& ds, const std::string& path) {
    csv::write_file(path, format_compact(ds));
}

void emit_vocabulary(const LabelVocabulary& vocab, const std::string& path) {
    std::string out;
    for (const auto& name : vocab.names()) {
        out += name;
        out += '\n';
    }
    csv::write_file(path, out);
}

}  // namespace eqn
