#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include "gestime/error.hpp"
#include "gestime/nnet/train.hpp"
#include "gestime/report.hpp"
#include "gestime/table_io.hpp"

// Checkpoint text format, one record per line, whitespace separated, all
// reals written in shortest round-trip form:
//
//   gestime-checkpoint 1
//   input_dim <D>  enc_dim <H>  dec_dim <S>      (one key per line)
//   learning_rate <r>  epochs <n>  batch_size <b>  seed <s>  feature_set <name>
//   normalizer <d>                               d = 0 when disabled
//   mean <d reals>  stddev <d reals>  fit_rows <n>   (only when d > 0)
//   train_stats <n> <l> <5 class counts>
//   initial_loss <r>
//   epoch_loss <count> <reals...>
//   tensor <name> <rows> <cols>                  followed by <rows> lines of <cols> reals
//   ... one tensor block per parameter, in declaration order ...
//   end
namespace gestime::nnet {

inline std::string format_checkpoint(const Checkpoint& ck) {
  std::ostringstream os;
  const Hyper& h = ck.hyper;
  os << "gestime-checkpoint " << kCheckpointVersion << '\n';
  os << "input_dim " << h.input_dim << '\n';
  os << "enc_dim " << h.enc_dim << '\n';
  os << "dec_dim " << h.dec_dim << '\n';
  os << "learning_rate " << format_exact(h.learning_rate) << '\n';
  os << "epochs " << h.epochs << '\n';
  os << "batch_size " << h.batch_size << '\n';
  os << "seed " << h.seed << '\n';
  os << "feature_set " << feature_set_name(h.feature_set) << '\n';
  const Normalizer& nz = ck.normalizer;
  os << "normalizer " << nz.mean.size() << '\n';
  if (nz.enabled()) {
    os << "mean";
    for (double v : nz.mean) os << ' ' << format_exact(v);
    os << "\nstddev";
    for (double v : nz.stddev) os << ' ' << format_exact(v);
    os << "\nfit_rows " << nz.fit_rows << '\n';
  }
  os << "train_stats " << ck.train_stats.n << ' ' << ck.train_stats.l;
  for (auto c : ck.train_stats.counts) os << ' ' << c;
  os << "\ninitial_loss " << format_exact(ck.initial_loss) << '\n';
  os << "epoch_loss " << ck.epoch_loss.size();
  for (double v : ck.epoch_loss) os << ' ' << format_exact(v);
  os << '\n';
  for (std::size_t i = 0; i < kNumParams; ++i) {
    const auto id = static_cast<ParamId>(i);
    const auto& s = ck.params.layout.shape(id);
    os << "tensor " << kParamNames[i] << ' ' << s.rows << ' ' << s.cols << '\n';
    const auto t = ck.params.tensor(id);
    for (std::size_t r = 0; r < s.rows; ++r) {
      for (std::size_t c = 0; c < s.cols; ++c) os << (c ? " " : "") << format_exact(t[r * s.cols + c]);
      os << '\n';
    }
  }
  os << "end\n";
  return os.str();
}

namespace detail {

class TokenReader {
 public:
  TokenReader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

  std::string word() {
    std::string w;
    if (!(in_ >> w)) fail("unexpected end of file");
    return w;
  }

  void expect(const std::string& key) {
    const std::string w = word();
    if (w != key) fail("expected '" + key + "', found '" + w + "'");
  }

  std::uint64_t unsigned_int() {
    const std::string w = word();
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(w.data(), w.data() + w.size(), v);
    if (ec != std::errc() || ptr != w.data() + w.size()) fail("expected an unsigned integer, found '" + w + "'");
    return v;
  }

  double real() {
    const std::string w = word();
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(w.data(), w.data() + w.size(), v);
    if (ec != std::errc() || ptr != w.data() + w.size()) fail("expected a number, found '" + w + "'");
    return v;
  }

  [[noreturn]] void fail(const std::string& what) const { throw InputFormatError(source_ + ": " + what); }

 private:
  std::istream& in_;
  std::string source_;
};

}  // namespace detail

inline Checkpoint parse_checkpoint(std::istream& in, const std::string& source) {
  detail::TokenReader r(in, source);
  r.expect("gestime-checkpoint");
  const auto version = r.unsigned_int();
  if (version != kCheckpointVersion) r.fail("unsupported checkpoint version " + std::to_string(version));
  Checkpoint ck;
  Hyper& h = ck.hyper;
  r.expect("input_dim");
  h.input_dim = r.unsigned_int();
  r.expect("enc_dim");
  h.enc_dim = r.unsigned_int();
  r.expect("dec_dim");
  h.dec_dim = r.unsigned_int();
  r.expect("learning_rate");
  h.learning_rate = r.real();
  r.expect("epochs");
  h.epochs = r.unsigned_int();
  r.expect("batch_size");
  h.batch_size = r.unsigned_int();
  r.expect("seed");
  h.seed = r.unsigned_int();
  r.expect("feature_set");
  const auto fs = parse_feature_set(r.word());
  if (!fs) r.fail("unknown feature set");
  h.feature_set = *fs;
  r.expect("normalizer");
  const std::size_t nd = r.unsigned_int();
  if (nd > 0) {
    ck.normalizer.set = h.feature_set;
    r.expect("mean");
    for (std::size_t i = 0; i < nd; ++i) ck.normalizer.mean.push_back(r.real());
    r.expect("stddev");
    for (std::size_t i = 0; i < nd; ++i) ck.normalizer.stddev.push_back(r.real());
    r.expect("fit_rows");
    ck.normalizer.fit_rows = r.unsigned_int();
  }
  ck.normalizer.set = h.feature_set;
  r.expect("train_stats");
  auto& st = ck.train_stats;
  st.n = r.unsigned_int();
  st.l = r.unsigned_int();
  for (auto& c : st.counts) c = static_cast<std::int64_t>(r.unsigned_int());
  const double nl = static_cast<double>(st.n) * static_cast<double>(st.l);
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    st.proportions[c] = nl > 0 ? static_cast<double>(st.counts[c]) / nl : 0.0;
  }
  r.expect("initial_loss");
  ck.initial_loss = r.real();
  r.expect("epoch_loss");
  const std::size_t ne = r.unsigned_int();
  for (std::size_t i = 0; i < ne; ++i) ck.epoch_loss.push_back(r.real());

  ck.params = Params(ParamLayout(dims_of(h)));
  for (std::size_t i = 0; i < kNumParams; ++i) {
    const auto id = static_cast<ParamId>(i);
    r.expect("tensor");
    r.expect(std::string(kParamNames[i]));
    const auto& s = ck.params.layout.shape(id);
    const auto rows = r.unsigned_int();
    const auto cols = r.unsigned_int();
    if (rows != s.rows || cols != s.cols) r.fail("tensor " + std::string(kParamNames[i]) + " has the wrong shape");
    for (double& v : ck.params.tensor(id)) v = r.real();
  }
  r.expect("end");
  return ck;
}

inline void save_checkpoint(const Checkpoint& ck, const std::filesystem::path& path) {
  write_text_file(path, format_checkpoint(ck));
}

inline Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputFormatError(path.string() + ": cannot open checkpoint");
  return parse_checkpoint(in, path.string());
}

}  // namespace gestime::nnet
