#include <charconv>
#include <cmath>
#include <sstream>
#include <unordered_map>

#include "purgelab/error.hpp"
#include "purgelab/io.hpp"
#include "text_util.hpp"

namespace purgelab {

namespace {

struct Field {
  std::string text;
  bool quoted = false;
};

using Row = std::vector<Field>;

// RFC 4180: quoted fields may contain delimiters, newlines and doubled quotes.
std::vector<Row> split_records(const std::string& text) {
  std::vector<Row> rows;
  Row row;
  Field field;
  bool in_quotes = false;
  bool row_has_content = false;
  auto end_field = [&] {
    if (!field.quoted) field.text = std::string(detail::trim(field.text));
    row.push_back(std::move(field));
    field = Field{};
  };
  auto end_row = [&] {
    end_field();
    if (row_has_content) rows.push_back(std::move(row));
    row.clear();
    row_has_content = false;
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.text.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field.text.push_back(c);
      }
      continue;
    }
    if (c == '"' && detail::trim(field.text).empty()) {
      in_quotes = true;
      field.quoted = true;
      field.text.clear();
      row_has_content = true;
    } else if (c == ',') {
      end_field();
      row_has_content = true;
    } else if (c == '\n') {
      end_row();
    } else if (c == '\r') {
      // CRLF
    } else {
      field.text.push_back(c);
      if (!std::isspace(static_cast<unsigned char>(c))) row_has_content = true;
    }
  }
  if (in_quotes) throw DataError(DataErrorKind::malformed, "unterminated quoted field");
  end_row();
  return rows;
}

bool is_missing_token(const Field& f) { return !f.quoted && (f.text.empty() || f.text == "?"); }

std::string quote_if_needed(const std::string& s) {
  const bool needs = s.empty() || s == "?" ||
                     s.find_first_of(",\"\n\r") != std::string::npos ||
                     detail::trim(s).size() != s.size();
  if (!needs) return s;
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace

std::string format_real(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw std::runtime_error("format_real: conversion failed");
  return std::string(buf, ptr);
}

Dataset parse_csv(const std::string& text, const std::string& name, const LabelColumn& label,
                  const TypeHints& hints) {
  const auto rows = split_records(text);
  if (rows.empty()) throw DataError(DataErrorKind::malformed, "'" + name + "': no header row");
  const Row& header = rows.front();
  const std::size_t width = header.size();

  std::size_t label_index = 0;
  if (const auto* by_name = std::get_if<std::string>(&label)) {
    auto it = std::find_if(header.begin(), header.end(),
                           [&](const Field& f) { return f.text == *by_name; });
    if (it == header.end()) {
      throw DataError(DataErrorKind::unknown_column,
                      "'" + name + "': no column named '" + *by_name + "'");
    }
    label_index = static_cast<std::size_t>(it - header.begin());
  } else {
    label_index = std::get<std::size_t>(label);
    if (label_index >= width) {
      throw DataError(DataErrorKind::unknown_column,
                      "'" + name + "': label column " + std::to_string(label_index) +
                          " out of range (" + std::to_string(width) + " columns)");
    }
  }
  for (const auto& [hint_name, hint] : hints) {
    if (std::none_of(header.begin(), header.end(),
                     [&](const Field& f) { return f.text == hint_name; })) {
      throw DataError(DataErrorKind::unknown_column,
                      "'" + name + "': type hint for unknown column '" + hint_name + "'");
    }
  }

  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != width) {
      throw DataError(DataErrorKind::ragged_row,
                      "'" + name + "': data row " + std::to_string(r) + " has " +
                          std::to_string(rows[r].size()) + " fields, header has " +
                          std::to_string(width));
    }
    if (is_missing_token(rows[r][label_index])) {
      throw DataError(DataErrorKind::missing_label,
                      "'" + name + "': data row " + std::to_string(r) + " has no label");
    }
  }
  if (rows.size() < 2) throw DataError(DataErrorKind::degenerate, "'" + name + "': no data rows");

  // Decide column kinds and categorical value lists.
  std::vector<AttributeMeta> columns(width);
  for (std::size_t c = 0; c < width; ++c) {
    AttributeMeta& meta = columns[c];
    meta.name = header[c].text;
    const auto hint = hints.find(meta.name);
    bool numeric = c != label_index;
    if (hint != hints.end()) {
      numeric = hint->second.kind == AttributeKind::numeric;
      if (c == label_index && numeric) {
        throw std::invalid_argument("label column '" + meta.name + "' cannot be numeric");
      }
      meta.values = hint->second.values;
    } else if (numeric) {
      for (std::size_t r = 1; r < rows.size() && numeric; ++r) {
        const Field& f = rows[r][c];
        if (!is_missing_token(f) && !detail::parse_real(f.text)) numeric = false;
      }
    }
    meta.kind = numeric ? AttributeKind::numeric : AttributeKind::categorical;
    if (numeric) {
      meta.values.clear();
      continue;
    }
    const bool fixed = !meta.values.empty();
    for (std::size_t r = 1; r < rows.size(); ++r) {
      const Field& f = rows[r][c];
      if (is_missing_token(f) || meta.index_of(f.text)) continue;
      if (fixed) {
        throw DataError(DataErrorKind::undeclared_value,
                        "'" + name + "': value '" + f.text + "' not listed for column '" +
                            meta.name + "'");
      }
      meta.values.push_back(f.text);
    }
    if (meta.values.empty()) meta.values.push_back("?");
  }

  std::vector<AttributeMeta> attributes;
  for (std::size_t c = 0; c < width; ++c) {
    if (c != label_index) attributes.push_back(columns[c]);
  }
  std::vector<Instance> instances;
  instances.reserve(rows.size() - 1);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    Instance inst;
    inst.values.reserve(attributes.size());
    for (std::size_t c = 0; c < width; ++c) {
      const Field& f = rows[r][c];
      const AttributeMeta& meta = columns[c];
      if (c == label_index) {
        inst.label = *meta.index_of(f.text);
        continue;
      }
      if (is_missing_token(f)) {
        inst.values.push_back(kMissing);
      } else if (meta.is_numeric()) {
        const auto v = detail::parse_real(f.text);
        if (!v) {
          throw DataError(DataErrorKind::malformed,
                          "'" + name + "': '" + f.text + "' in numeric column '" + meta.name +
                              "' is not a number");
        }
        inst.values.push_back(*v);
      } else {
        inst.values.push_back(static_cast<double>(*meta.index_of(f.text)));
      }
    }
    instances.push_back(std::move(inst));
  }
  return Dataset(name, std::move(attributes), columns[label_index].values, std::move(instances),
                 columns[label_index].name);
}

Dataset load_csv(const std::filesystem::path& path, const LabelColumn& label,
                 const TypeHints& hints) {
  return parse_csv(detail::read_file(path), path.stem().string(), label, hints);
}

Dataset load_csv(const std::filesystem::path& path) {
  const std::string text = detail::read_file(path);
  const auto rows = split_records(text);
  if (rows.empty()) {
    throw DataError(DataErrorKind::malformed, "'" + path.string() + "': no header row");
  }
  return parse_csv(text, path.stem().string(), LabelColumn{rows.front().size() - 1});
}

std::string to_csv(const Dataset& dataset) {
  std::ostringstream out;
  for (const auto& a : dataset.attributes()) out << quote_if_needed(a.name) << ',';
  out << quote_if_needed(dataset.class_attribute()) << '\n';
  for (const auto& inst : dataset.instances()) {
    for (std::size_t a = 0; a < dataset.attribute_count(); ++a) {
      const double v = inst.values[a];
      if (is_missing(v)) {
        out << '?';
      } else if (dataset.attribute(a).is_numeric()) {
        out << format_real(v);
      } else {
        out << quote_if_needed(dataset.attribute(a).values[static_cast<std::size_t>(v)]);
      }
      out << ',';
    }
    out << quote_if_needed(dataset.class_names()[inst.label]) << '\n';
  }
  return out.str();
}

void write_csv(const Dataset& dataset, const std::filesystem::path& path) {
  detail::write_file(path, to_csv(dataset));
}

TypeHints hints_from_schema(const Dataset& dataset) {
  TypeHints hints;
  for (const auto& a : dataset.attributes()) hints[a.name] = ColumnHint{a.kind, a.values};
  hints[dataset.class_attribute()] = ColumnHint{AttributeKind::categorical, dataset.class_names()};
  return hints;
}

Dataset load_dataset(const std::filesystem::path& path) {
  if (detail::iequals(path.extension().string(), ".arff")) return load_arff(path);
  return load_csv(path);
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  if (detail::iequals(path.extension().string(), ".arff")) {
    write_arff(dataset, path);
  } else {
    write_csv(dataset, path);
  }
}

}  // namespace purgelab
