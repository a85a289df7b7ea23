#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gestime/corpus.hpp"
#include "gestime/error.hpp"
#include "gestime/keyvalue.hpp"
#include "gestime/report.hpp"
#include "gestime/table_io.hpp"

// Dataset bundle: a directory with
//   manifest.txt  key = value: format, version, n, l, frame_ms, per-class
//                 counts and proportions of the padded hand-only tracks,
//                 and the split seed when one was fixed
//   stats.csv     class,count,proportion
//   samples.tsv   tab-separated records, one block per utterance:
//                   sample <recording> <speaker> <start_ms> <end_ms> <length>
//                   labels <class>...                (unpadded)
//                   brow <up|down> <first> <last>    (zero or more)
//                   frame f0 f0_dir intensity mfcc00..mfcc12   (length lines)
namespace gestime {

inline constexpr int kDatasetVersion = 1;

inline KeyValueFile dataset_manifest(const Dataset& ds, std::optional<std::uint64_t> split_seed) {
  const std::size_t l = padded_length(ds);
  const DistributionStats st = class_distribution(pad_dataset(ds, l));
  KeyValueFile kv;
  kv.set("format", "gestime-dataset");
  kv.set("version", std::to_string(kDatasetVersion));
  kv.set("n", std::to_string(ds.samples.size()));
  kv.set("l", std::to_string(l));
  kv.set("frame_ms", std::to_string(ds.frame_ms));
  for (GestureClass c : kAllClasses) kv.set("count." + std::string(class_name(c)), std::to_string(st.count(c)));
  for (GestureClass c : kAllClasses) {
    kv.set("proportion." + std::string(class_name(c)), format_fixed(st.proportion(c), 6));
  }
  if (split_seed) kv.set("split_seed", std::to_string(*split_seed));
  return kv;
}

inline std::string stats_csv(const DistributionStats& st) {
  std::ostringstream os;
  os << "class,count,proportion\n";
  for (GestureClass c : kAllClasses) {
    os << class_name(c) << ',' << st.count(c) << ',' << format_fixed(st.proportion(c), 6) << '\n';
  }
  return os.str();
}

inline std::string format_samples(const Dataset& ds) {
  std::ostringstream os;
  for (const auto& s : ds.samples) {
    os << "sample\t" << s.recording << '\t' << s.speaker << '\t' << s.start_ms << '\t' << s.end_ms << '\t'
       << s.length << "\nlabels";
    for (std::size_t k = 0; k < s.length; ++k) os << '\t' << class_name(s.labels[k]);
    os << '\n';
    for (const auto& b : s.brows) {
      os << "brow\t" << (b.direction == BrowDirection::Up ? "up" : "down") << '\t' << b.first << '\t' << b.last << '\n';
    }
    for (std::size_t k = 0; k < s.length; ++k) {
      const auto& f = s.frames[k];
      os << "frame\t" << format_exact(f.f0) << '\t' << format_exact(f.f0_dir) << '\t' << format_exact(f.intensity);
      for (double v : f.mfcc) os << '\t' << format_exact(v);
      os << '\n';
    }
  }
  return os.str();
}

inline Dataset parse_samples(std::istream& in, const std::string& source, std::int64_t frame_ms) {
  Dataset ds;
  ds.frame_ms = frame_ms;
  std::string line;
  std::size_t line_no = 0;
  const auto fail = [&](const std::string& what) -> void {
    throw InputFormatError(source + ":" + std::to_string(line_no) + ": " + what);
  };
  const auto to_int = [&](const std::string& s) {
    std::int64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) fail("expected an integer, got '" + s + "'");
    return v;
  };
  const auto to_real = [&](const std::string& s) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) fail("expected a number, got '" + s + "'");
    return v;
  };
  Sample* cur = nullptr;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_fields(line, '\t');
    if (f[0] == "sample") {
      if (f.size() != 6) fail("sample record needs 5 fields");
      ds.samples.emplace_back();
      cur = &ds.samples.back();
      cur->recording = f[1];
      cur->speaker = f[2];
      cur->start_ms = to_int(f[3]);
      cur->end_ms = to_int(f[4]);
      cur->length = static_cast<std::size_t>(to_int(f[5]));
      continue;
    }
    if (cur == nullptr) fail("record before the first 'sample' line");
    if (f[0] == "labels") {
      for (std::size_t k = 1; k < f.size(); ++k) {
        const auto c = parse_class(f[k]);
        if (!c) fail("unknown class '" + f[k] + "'");
        cur->labels.push_back(*c);
      }
    } else if (f[0] == "brow") {
      if (f.size() != 4 || (f[1] != "up" && f[1] != "down")) fail("malformed brow record");
      cur->brows.push_back({to_int(f[2]), to_int(f[3]), f[1] == "up" ? BrowDirection::Up : BrowDirection::Down});
    } else if (f[0] == "frame") {
      if (f.size() != 4 + kNumMfcc) fail("frame record needs 16 values");
      FeatureFrame fr;
      fr.f0 = to_real(f[1]);
      fr.f0_dir = to_real(f[2]);
      fr.intensity = to_real(f[3]);
      for (std::size_t k = 0; k < kNumMfcc; ++k) fr.mfcc[k] = to_real(f[4 + k]);
      cur->frames.push_back(fr);
    } else {
      fail("unknown record type '" + f[0] + "'");
    }
  }
  for (const auto& s : ds.samples) {
    if (s.labels.size() != s.length || s.frames.size() != s.length) {
      throw InputFormatError(source + ": sample " + s.recording + "/" + s.speaker + "@" + std::to_string(s.start_ms) +
                             " has inconsistent label/frame counts");
    }
  }
  return ds;
}

inline void save_dataset(const Dataset& ds, const std::filesystem::path& dir,
                         std::optional<std::uint64_t> split_seed = std::nullopt) {
  std::filesystem::create_directories(dir);
  const std::size_t l = padded_length(ds);
  write_text_file(dir / "manifest.txt", dataset_manifest(ds, split_seed).format());
  write_text_file(dir / "stats.csv", stats_csv(class_distribution(pad_dataset(ds, l))));
  write_text_file(dir / "samples.tsv", format_samples(ds));
}

struct DatasetBundle {
  Dataset dataset;
  KeyValueFile manifest;
};

inline DatasetBundle load_dataset(const std::filesystem::path& dir) {
  DatasetBundle b;
  b.manifest = KeyValueFile::read((dir / "manifest.txt").string());
  if (b.manifest.get("format") != "gestime-dataset") {
    throw InputFormatError((dir / "manifest.txt").string() + ": not a dataset manifest");
  }
  if (b.manifest.integer("version") != kDatasetVersion) {
    throw InputFormatError((dir / "manifest.txt").string() + ": unsupported dataset version");
  }
  std::ifstream in(dir / "samples.tsv", std::ios::binary);
  if (!in) throw InputFormatError((dir / "samples.tsv").string() + ": cannot open file");
  b.dataset = parse_samples(in, (dir / "samples.tsv").string(), b.manifest.integer("frame_ms"));
  if (static_cast<std::int64_t>(b.dataset.samples.size()) != b.manifest.integer("n")) {
    throw InputFormatError((dir / "manifest.txt").string() + ": sample count disagrees with samples.tsv");
  }
  return b;
}

inline std::string format_split(const Split& s, std::uint64_t seed) {
  std::ostringstream os;
  os << "seed\t" << seed << '\n';
  const auto line = [&](const char* name, const std::vector<std::size_t>& idx) {
    os << name;
    for (std::size_t i : idx) os << '\t' << i;
    os << '\n';
  };
  line("train", s.train);
  line("val", s.val);
  line("test", s.test);
  return os.str();
}

inline Split parse_split(std::istream& in, const std::string& source) {
  Split s;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_fields(line, '\t');
    std::vector<std::size_t>* dst = nullptr;
    if (f[0] == "train") dst = &s.train;
    else if (f[0] == "val") dst = &s.val;
    else if (f[0] == "test") dst = &s.test;
    else if (f[0] == "seed") continue;
    else throw InputFormatError(source + ":" + std::to_string(line_no) + ": unknown split record '" + f[0] + "'");
    for (std::size_t k = 1; k < f.size(); ++k) {
      std::size_t v = 0;
      const auto [ptr, ec] = std::from_chars(f[k].data(), f[k].data() + f[k].size(), v);
      if (ec != std::errc() || ptr != f[k].data() + f[k].size()) {
        throw InputFormatError(source + ":" + std::to_string(line_no) + ": bad sample index '" + f[k] + "'");
      }
      dst->push_back(v);
    }
  }
  return s;
}

}  // namespace gestime
