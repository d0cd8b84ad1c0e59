#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "purgelab/dataset.hpp"

namespace purgelab {

/// Label column by header name or zero-based position.
using LabelColumn = std::variant<std::string, std::size_t>;

/// Forces a column's kind. For categorical columns a non-empty value list
/// also fixes the value order (and must cover every cell).
struct ColumnHint {
  AttributeKind kind = AttributeKind::numeric;
  std::vector<std::string> values;
};

using TypeHints = std::map<std::string, ColumnHint, std::less<>>;

/// Reads an RFC-4180 style CSV with a header row. "?" and empty cells are
/// missing. Unhinted columns are numeric iff every non-missing cell parses
/// as a finite real; otherwise categorical with values in order of first
/// appearance. The label column is always categorical and may not have
/// missing cells.
Dataset load_csv(const std::filesystem::path& path, const LabelColumn& label,
                 const TypeHints& hints = {});

/// Same as above with the last column as label.
Dataset load_csv(const std::filesystem::path& path);

/// Parses CSV text already in memory; name becomes the dataset name.
Dataset parse_csv(const std::string& text, const std::string& name, const LabelColumn& label,
                  const TypeHints& hints = {});

/// Writes attributes then the class column (named by class_attribute()).
/// Reals use the shortest round-trip representation; missing cells are "?".
void write_csv(const Dataset& dataset, const std::filesystem::path& path);
std::string to_csv(const Dataset& dataset);

/// Hints reproducing the dataset's schema exactly, including the label column.
TypeHints hints_from_schema(const Dataset& dataset);

/// Reads the dense ARFF subset: numeric/real/integer and nominal attributes,
/// "?" missing values. The class is the attribute named "class"
/// (case-insensitive) if present, else the last attribute.
Dataset load_arff(const std::filesystem::path& path);
Dataset parse_arff(const std::string& text, const std::string& fallback_name);

void write_arff(const Dataset& dataset, const std::filesystem::path& path);
std::string to_arff(const Dataset& dataset);

/// Dispatches on extension: ".arff" to load_arff, anything else to load_csv
/// with the last column as label.
Dataset load_dataset(const std::filesystem::path& path);
void save_dataset(const Dataset& dataset, const std::filesystem::path& path);

/// Shortest round-trip decimal form of a finite double.
std::string format_real(double value);

}  // namespace purgelab
