#pragma once

#include <array>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gestime/error.hpp"
#include "gestime/gesture_class.hpp"
#include "gestime/seqmetric.hpp"
#include "gestime/table_io.hpp"

namespace gestime {

// Row order of the published result tables.
inline constexpr std::array<GestureClass, kNumRealClasses> kReportOrder = {
    GestureClass::Beat, GestureClass::IdeationalStroke, GestureClass::IdeationalOther, GestureClass::NoGesture};

inline constexpr std::string_view kUndefined = "NA";

inline std::string format_score(const std::optional<double>& v, int digits = 6) {
  return v ? format_fixed(*v, digits) : std::string(kUndefined);
}

inline std::string eval_report_csv(const EvalScores& s) {
  std::ostringstream os;
  os << "class,alignment,insertion,deletion,t_c,p_c\n";
  for (GestureClass c : kAllClasses) {
    if (!scored_class(c, s.config)) continue;
    const auto& cs = s[c];
    os << class_name(c) << ',' << format_score(cs.alignment) << ',' << format_score(cs.insertion) << ','
       << format_score(cs.deletion) << ',' << cs.t_c << ',' << format_fixed(cs.p_c, 6) << '\n';
  }
  return os.str();
}

inline EvalScores parse_eval_report_csv(std::istream& in, const std::string& source) {
  const Table t = Table::parse(in, source, ',', {"class", "alignment", "insertion", "deletion", "t_c", "p_c"});
  EvalScores s;
  for (const auto& row : t.rows()) {
    const auto c = parse_class(t.text(row, "class"));
    if (!c) t.fail(row, "class", "unknown class '" + t.text(row, "class") + "'");
    auto& cs = s[*c];
    const auto opt = [&](std::string_view col) -> std::optional<double> {
      if (t.text(row, col) == kUndefined) return std::nullopt;
      return t.real(row, col);
    };
    cs.alignment = opt("alignment");
    cs.insertion = opt("insertion");
    cs.deletion = opt("deletion");
    cs.t_c = t.integer(row, "t_c");
    cs.p_c = t.real(row, "p_c");
    if (*c == GestureClass::Suffix) s.config.include_suffix = true;
  }
  return s;
}

// One condition block of a result table: a title row followed by
// Alignment / Insertion / Deletion per class.
inline std::string markdown_scores(std::string_view title, const EvalScores& s) {
  std::ostringstream os;
  os << "| " << title << " | Alignment | Insertion | Deletion |\n";
  os << "|---|---|---|---|\n";
  for (GestureClass c : kReportOrder) {
    const auto& cs = s[c];
    os << "| " << class_name(c) << " | " << format_score(cs.alignment, 3) << " | " << format_score(cs.insertion, 3)
       << " | " << format_score(cs.deletion, 3) << " |\n";
  }
  return os.str();
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("failed writing " + path.string());
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputFormatError(path.string() + ": cannot open file");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace gestime
