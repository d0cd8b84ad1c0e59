#include <sstream>

#include "purgelab/error.hpp"
#include "purgelab/io.hpp"
#include "text_util.hpp"

namespace purgelab {

namespace {

// Splits on commas outside single or double quotes; strips the quotes.
std::vector<std::pair<std::string, bool>> split_quoted(std::string_view text) {
  std::vector<std::pair<std::string, bool>> out;
  std::string current;
  bool quoted = false;
  char quote = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quote) {
      if (c == '\\' && i + 1 < text.size()) {
        current.push_back(text[++i]);
      } else if (c == quote) {
        quote = 0;
      } else {
        current.push_back(c);
      }
    } else if ((c == '\'' || c == '"') && detail::trim(current).empty()) {
      quote = c;
      quoted = true;
      current.clear();
    } else if (c == ',') {
      out.emplace_back(quoted ? current : std::string(detail::trim(current)), quoted);
      current.clear();
      quoted = false;
    } else {
      current.push_back(c);
    }
  }
  if (quote) throw DataError(DataErrorKind::malformed, "unterminated quote in '" + std::string(text) + "'");
  out.emplace_back(quoted ? current : std::string(detail::trim(current)), quoted);
  return out;
}

// Reads a possibly quoted token from the front of s and advances s.
std::string take_token(std::string_view& s) {
  s = detail::trim(s);
  if (s.empty()) return {};
  std::string token;
  if (s.front() == '\'' || s.front() == '"') {
    const char q = s.front();
    std::size_t i = 1;
    for (; i < s.size() && s[i] != q; ++i) {
      if (s[i] == '\\' && i + 1 < s.size()) ++i;
      token.push_back(s[i]);
    }
    if (i >= s.size()) throw DataError(DataErrorKind::malformed, "unterminated quoted name");
    s.remove_prefix(i + 1);
    return token;
  }
  std::size_t i = 0;
  while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i])) && s[i] != '{') ++i;
  token = std::string(s.substr(0, i));
  s.remove_prefix(i);
  return token;
}

std::string arff_quote(const std::string& s) {
  const bool needs = s.empty() || s == "?" ||
                     s.find_first_of(" \t,'\"{}%\\") != std::string::npos;
  if (!needs) return s;
  std::string out = "'";
  for (const char c : s) {
    if (c == '\'' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('\'');
  return out;
}

}  // namespace

Dataset parse_arff(const std::string& text, const std::string& fallback_name) {
  enum class Section { preamble, header, data };
  Section section = Section::preamble;
  std::string relation = fallback_name;
  std::vector<AttributeMeta> declared;
  std::vector<std::vector<std::pair<std::string, bool>>> rows;

  std::istringstream lines(text);
  std::string raw;
  std::size_t line_no = 0;
  auto fail = [&](DataErrorKind kind, const std::string& what) {
    throw DataError(kind, "'" + fallback_name + "' line " + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(lines, raw)) {
    ++line_no;
    std::string_view line = detail::trim(raw);
    if (line.empty() || line.front() == '%') continue;
    if (section == Section::data) {
      if (line.front() == '{') fail(DataErrorKind::unsupported_feature, "sparse data rows");
      rows.push_back(split_quoted(line));
      continue;
    }
    if (line.front() != '@') fail(DataErrorKind::malformed, "expected a declaration");
    std::string_view rest = line;
    const std::string keyword = detail::lower(take_token(rest));
    if (keyword == "@relation") {
      if (section != Section::preamble) fail(DataErrorKind::malformed, "@relation out of order");
      relation = take_token(rest);
      section = Section::header;
    } else if (keyword == "@attribute") {
      if (section != Section::header) fail(DataErrorKind::malformed, "@attribute before @relation");
      AttributeMeta meta;
      meta.name = take_token(rest);
      rest = detail::trim(rest);
      if (meta.name.empty() || rest.empty()) fail(DataErrorKind::malformed, "incomplete @attribute");
      if (rest.front() == '{') {
        const auto close = rest.rfind('}');
        if (close == std::string_view::npos) fail(DataErrorKind::malformed, "unclosed nominal list");
        meta.kind = AttributeKind::categorical;
        for (auto& [value, quoted] : split_quoted(rest.substr(1, close - 1))) {
          if (value.empty() && !quoted) continue;
          meta.values.push_back(std::move(value));
        }
        if (meta.values.empty()) fail(DataErrorKind::malformed, "empty nominal list");
      } else {
        const std::string type = detail::lower(take_token(rest));
        if (type == "numeric" || type == "real" || type == "integer") {
          meta.kind = AttributeKind::numeric;
        } else if (type == "string" || type == "date" || type == "relational") {
          fail(DataErrorKind::unsupported_feature, "attribute type '" + type + "'");
        } else {
          fail(DataErrorKind::malformed, "unknown attribute type '" + type + "'");
        }
      }
      declared.push_back(std::move(meta));
    } else if (keyword == "@data") {
      if (section != Section::header || declared.empty()) {
        fail(DataErrorKind::malformed, "@data before any @attribute");
      }
      section = Section::data;
    } else if (keyword == "@end") {
      fail(DataErrorKind::unsupported_feature, "relational @end");
    } else {
      fail(DataErrorKind::malformed, "unknown declaration '" + keyword + "'");
    }
  }
  if (section != Section::data) throw DataError(DataErrorKind::malformed, "'" + fallback_name + "': no @data section");

  std::size_t class_index = declared.size() - 1;
  for (std::size_t a = 0; a < declared.size(); ++a) {
    if (detail::iequals(declared[a].name, "class")) {
      class_index = a;
      break;
    }
  }
  if (!declared[class_index].is_categorical()) {
    throw DataError(DataErrorKind::unsupported_feature,
                    "'" + fallback_name + "': class attribute '" + declared[class_index].name +
                        "' is not nominal");
  }

  std::vector<AttributeMeta> attributes;
  for (std::size_t a = 0; a < declared.size(); ++a) {
    if (a != class_index) attributes.push_back(declared[a]);
  }
  std::vector<Instance> instances;
  instances.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& row = rows[r];
    const std::string where = "'" + fallback_name + "' data row " + std::to_string(r + 1);
    if (row.size() != declared.size()) {
      throw DataError(DataErrorKind::ragged_row, where + " has " + std::to_string(row.size()) +
                                                     " values, expected " +
                                                     std::to_string(declared.size()));
    }
    Instance inst;
    for (std::size_t a = 0; a < declared.size(); ++a) {
      const auto& [token, quoted] = row[a];
      const bool missing = !quoted && token == "?";
      const AttributeMeta& meta = declared[a];
      if (a == class_index) {
        if (missing) throw DataError(DataErrorKind::missing_label, where + " has no class value");
        const auto idx = meta.index_of(token);
        if (!idx) throw DataError(DataErrorKind::undeclared_value, where + ": class '" + token + "'");
        inst.label = *idx;
        continue;
      }
      if (missing) {
        inst.values.push_back(kMissing);
      } else if (meta.is_numeric()) {
        const auto v = detail::parse_real(token);
        if (!v) throw DataError(DataErrorKind::malformed, where + ": '" + token + "' is not numeric");
        inst.values.push_back(*v);
      } else {
        const auto idx = meta.index_of(token);
        if (!idx) {
          throw DataError(DataErrorKind::undeclared_value,
                          where + ": '" + token + "' for attribute '" + meta.name + "'");
        }
        inst.values.push_back(static_cast<double>(*idx));
      }
    }
    instances.push_back(std::move(inst));
  }
  return Dataset(relation, std::move(attributes), declared[class_index].values,
                 std::move(instances), declared[class_index].name);
}

Dataset load_arff(const std::filesystem::path& path) {
  return parse_arff(detail::read_file(path), path.stem().string());
}

std::string to_arff(const Dataset& dataset) {
  std::ostringstream out;
  out << "@relation " << arff_quote(dataset.name()) << "\n\n";
  auto nominal = [](const std::vector<std::string>& values) {
    std::string s = "{";
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (i) s += ',';
      s += arff_quote(values[i]);
    }
    return s + "}";
  };
  for (const auto& a : dataset.attributes()) {
    out << "@attribute " << arff_quote(a.name) << ' '
        << (a.is_numeric() ? std::string("numeric") : nominal(a.values)) << '\n';
  }
  out << "@attribute " << arff_quote(dataset.class_attribute()) << ' '
      << nominal(dataset.class_names()) << "\n\n@data\n";
  for (const auto& inst : dataset.instances()) {
    for (std::size_t a = 0; a < dataset.attribute_count(); ++a) {
      const double v = inst.values[a];
      if (is_missing(v)) {
        out << '?';
      } else if (dataset.attribute(a).is_numeric()) {
        out << format_real(v);
      } else {
        out << arff_quote(dataset.attribute(a).values[static_cast<std::size_t>(v)]);
      }
      out << ',';
    }
    out << arff_quote(dataset.class_names()[inst.label]) << '\n';
  }
  return out.str();
}

void write_arff(const Dataset& dataset, const std::filesystem::path& path) {
  detail::write_file(path, to_arff(dataset));
}

}  // namespace purgelab
