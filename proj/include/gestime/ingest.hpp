#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "gestime/corpus.hpp"
#include "gestime/error.hpp"
#include "gestime/features.hpp"
#include "gestime/report.hpp"
#include "gestime/table_io.hpp"

// Interchange files of an annotated corpus and their conversion into a
// Dataset of utterances.
//
//   words.tsv     recording speaker text start_ms end_ms
//   gestures.tsv  recording speaker phase gtype communicative start_ms end_ms
//   aus.csv       recording,speaker,timestamp_ms,au_id,value,confidence
//   features.csv  recording,speaker,frame_ms,f0,f0_dir,intensity,mfcc00..mfcc12
//
// All files carry a header row; times are integer milliseconds.
namespace gestime {

struct WordRow {
  std::string recording;
  std::string speaker;
  WordToken word;
  std::size_t line = 0;
};

struct GestureRow {
  std::string recording;
  std::string speaker;
  GestureAnnotation gesture;
};

struct AuRow {
  std::string recording;
  std::string speaker;
  AuFrame frame;
};

struct FeatureRow {
  std::string recording;
  std::string speaker;
  std::int64_t frame_ms = 0;
  FeatureFrame frame;
};

struct RawCorpus {
  std::vector<WordRow> words;
  std::vector<GestureRow> gestures;
  std::vector<AuRow> aus;
  std::vector<FeatureRow> features;
};

struct CorpusPaths {
  std::filesystem::path words;
  std::filesystem::path gestures;
  std::filesystem::path aus;
  std::filesystem::path features;

  static CorpusPaths in_directory(const std::filesystem::path& dir) {
    return {dir / "words.tsv", dir / "gestures.tsv", dir / "aus.csv", dir / "features.csv"};
  }
};

inline std::vector<std::string> feature_columns() {
  std::vector<std::string> cols = {"recording", "speaker", "frame_ms", "f0", "f0_dir", "intensity"};
  for (std::size_t k = 0; k < kNumMfcc; ++k) cols.push_back(k < 10 ? "mfcc0" + std::to_string(k) : "mfcc" + std::to_string(k));
  return cols;
}

inline RawCorpus read_corpus(const CorpusPaths& paths) {
  RawCorpus raw;
  {
    const Table t = Table::read(paths.words.string(), '\t', {"recording", "speaker", "text", "start_ms", "end_ms"});
    for (const auto& row : t.rows()) {
      WordRow w{t.text(row, "recording"), t.text(row, "speaker"),
                {t.text(row, "text"), t.integer(row, "start_ms"), t.integer(row, "end_ms")}, row.line};
      if (w.word.start_ms >= w.word.end_ms) t.fail(row, "end_ms", "end_ms must exceed start_ms");
      raw.words.push_back(std::move(w));
    }
  }
  {
    const Table t = Table::read(paths.gestures.string(), '\t',
                                {"recording", "speaker", "phase", "gtype", "communicative", "start_ms", "end_ms"});
    for (const auto& row : t.rows()) {
      GestureRow g{t.text(row, "recording"), t.text(row, "speaker"), {}};
      const auto phase = parse_phase(t.text(row, "phase"));
      if (!phase) t.fail(row, "phase", "unknown gesture phase '" + t.text(row, "phase") + "'");
      const auto gtype = parse_type(t.text(row, "gtype"));
      if (!gtype) t.fail(row, "gtype", "unknown gesture type '" + t.text(row, "gtype") + "'");
      const std::string& comm = t.text(row, "communicative");
      if (comm != "0" && comm != "1") t.fail(row, "communicative", "expected 1 or 0, got '" + comm + "'");
      g.gesture = {*phase, *gtype, comm == "1", t.integer(row, "start_ms"), t.integer(row, "end_ms")};
      if (g.gesture.start_ms >= g.gesture.end_ms) t.fail(row, "end_ms", "end_ms must exceed start_ms");
      raw.gestures.push_back(std::move(g));
    }
  }
  {
    const Table t = Table::read(paths.aus.string(), ',',
                                {"recording", "speaker", "timestamp_ms", "au_id", "value", "confidence"});
    for (const auto& row : t.rows()) {
      AuRow a{t.text(row, "recording"), t.text(row, "speaker"), {}};
      const auto au = parse_au(t.text(row, "au_id"));
      if (!au) t.fail(row, "au_id", "unknown action unit '" + t.text(row, "au_id") + "'");
      a.frame = {*au, t.real(row, "value"), t.real(row, "confidence"), t.integer(row, "timestamp_ms")};
      if (a.frame.confidence < 0.0 || a.frame.confidence > 1.0) t.fail(row, "confidence", "must lie in [0, 1]");
      if (a.frame.value < 0.0) t.fail(row, "value", "must be non-negative");
      raw.aus.push_back(std::move(a));
    }
  }
  {
    const auto cols = feature_columns();
    const Table t = Table::read(paths.features.string(), ',', cols);
    for (const auto& row : t.rows()) {
      FeatureRow f{t.text(row, "recording"), t.text(row, "speaker"), t.integer(row, "frame_ms"), {}};
      f.frame.f0 = t.real(row, "f0");
      f.frame.f0_dir = t.real(row, "f0_dir");
      f.frame.intensity = t.real(row, "intensity");
      for (std::size_t k = 0; k < kNumMfcc; ++k) f.frame.mfcc[k] = t.real(row, cols[6 + k]);
      raw.features.push_back(std::move(f));
    }
  }
  return raw;
}

inline void write_corpus(const RawCorpus& raw, const CorpusPaths& paths) {
  {
    std::ostringstream os;
    os << "recording\tspeaker\ttext\tstart_ms\tend_ms\n";
    for (const auto& w : raw.words) {
      os << w.recording << '\t' << w.speaker << '\t' << w.word.text << '\t' << w.word.start_ms << '\t'
         << w.word.end_ms << '\n';
    }
    write_text_file(paths.words, os.str());
  }
  {
    std::ostringstream os;
    os << "recording\tspeaker\tphase\tgtype\tcommunicative\tstart_ms\tend_ms\n";
    for (const auto& g : raw.gestures) {
      os << g.recording << '\t' << g.speaker << '\t' << phase_name(g.gesture.phase) << '\t'
         << type_name(g.gesture.gtype) << '\t' << (g.gesture.communicative ? 1 : 0) << '\t' << g.gesture.start_ms
         << '\t' << g.gesture.end_ms << '\n';
    }
    write_text_file(paths.gestures, os.str());
  }
  {
    std::ostringstream os;
    os << "recording,speaker,timestamp_ms,au_id,value,confidence\n";
    for (const auto& a : raw.aus) {
      os << a.recording << ',' << a.speaker << ',' << a.frame.timestamp_ms << ',' << au_name(a.frame.au) << ','
         << format_exact(a.frame.value) << ',' << format_exact(a.frame.confidence) << '\n';
    }
    write_text_file(paths.aus, os.str());
  }
  {
    std::ostringstream os;
    const auto cols = feature_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
    os << '\n';
    for (const auto& f : raw.features) {
      os << f.recording << ',' << f.speaker << ',' << f.frame_ms << ',' << format_exact(f.frame.f0) << ','
         << format_exact(f.frame.f0_dir) << ',' << format_exact(f.frame.intensity);
      for (double v : f.frame.mfcc) os << ',' << format_exact(v);
      os << '\n';
    }
    write_text_file(paths.features, os.str());
  }
}

struct IngestOptions {
  std::int64_t frame_ms = kDefaultFrameMs;
  std::int64_t ipu_gap_ms = kDefaultIpuGapMs;
  double au_confidence_min = kAuConfidenceMin;
  double au_mean_min = kAuMeanMin;
};

// Segments every (recording, speaker) stream into utterances and builds the
// unpadded samples: hand-gesture class track, feature frames, eyebrow spans.
// Streams are visited in order of first appearance in the word list;
// utterances shorter than one frame are skipped.
inline Dataset ingest(const RawCorpus& raw, const IngestOptions& opt = {}) {
  using Key = std::pair<std::string, std::string>;
  std::vector<Key> order;
  std::map<Key, std::vector<const WordRow*>> words;
  for (const auto& w : raw.words) {
    Key k{w.recording, w.speaker};
    auto [it, fresh] = words.try_emplace(k);
    if (fresh) order.push_back(k);
    it->second.push_back(&w);
  }
  std::map<Key, std::vector<GestureAnnotation>> gestures;
  for (const auto& g : raw.gestures) gestures[{g.recording, g.speaker}].push_back(g.gesture);
  std::map<Key, std::vector<AuFrame>> aus;
  for (const auto& a : raw.aus) aus[{a.recording, a.speaker}].push_back(a.frame);
  std::map<Key, std::map<std::int64_t, const FeatureFrame*>> feats;
  for (const auto& f : raw.features) feats[{f.recording, f.speaker}][f.frame_ms] = &f.frame;

  Dataset ds;
  ds.frame_ms = opt.frame_ms;
  for (const Key& key : order) {
    const auto& rows = words[key];
    std::vector<WordToken> tokens;
    tokens.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (i > 0 && rows[i]->word.start_ms < rows[i - 1]->word.end_ms) {
        throw InputFormatError("words: line " + std::to_string(rows[i]->line) + ": word '" + rows[i]->word.text +
                               "' of " + key.first + "/" + key.second +
                               " starts before the previous word ends (unsorted or overlapping)");
      }
      tokens.push_back(rows[i]->word);
    }
    auto au_frames = aus[key];
    std::stable_sort(au_frames.begin(), au_frames.end(),
                     [](const AuFrame& a, const AuFrame& b) { return a.timestamp_ms < b.timestamp_ms; });
    const auto brows = filter_au_blocks(au_frames, opt.au_confidence_min, opt.au_mean_min);
    const auto& g = gestures[key];
    const auto& f = feats[key];
    for (const TimeSpan span : segment_ipus(tokens, opt.ipu_gap_ms)) {
      const std::size_t n = frame_count(span, opt.frame_ms);
      if (n == 0) continue;
      Sample s;
      s.recording = key.first;
      s.speaker = key.second;
      s.start_ms = span.start_ms;
      s.end_ms = span.end_ms;
      s.length = n;
      s.labels = derive_class_track(g, span, opt.frame_ms);
      s.frames.reserve(n);
      for (std::size_t k = 0; k < n; ++k) {
        // The feature row whose 100 ms cell contains the frame midpoint.
        const std::int64_t mid = span.start_ms + static_cast<std::int64_t>(k) * opt.frame_ms + opt.frame_ms / 2;
        const std::int64_t cell = (mid / opt.frame_ms) * opt.frame_ms;
        const auto it = f.find(cell);
        if (it == f.end()) {
          throw InputFormatError("features: no frame at " + std::to_string(cell) + " ms for " + key.first + "/" +
                                 key.second);
        }
        s.frames.push_back(*it->second);
      }
      for (const auto& b : brows) {
        if (auto fs = to_frame_span(b, span, n, opt.frame_ms)) s.brows.push_back(*fs);
      }
      ds.samples.push_back(std::move(s));
    }
  }
  return ds;
}

}  // namespace gestime
