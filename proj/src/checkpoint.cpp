#include "hyst/checkpoint.hpp"

#include <charconv>
#include <sstream>
#include <string>

#include "hyst/errors.hpp"
#include "hyst/trace.hpp"

namespace hyst {

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  validate(ckpt.params);
  ckpt.norm.validate();
  auto out = create_new_file(path);
  out << "kind " << to_string(ckpt.params.kind) << '\n';
  out << "hidden " << ckpt.params.hidden << '\n';
  out << "dt " << format_exact(ckpt.params.dt) << '\n';
  out << "seed " << ckpt.seed << '\n';
  out << "norm " << format_exact(ckpt.norm.h_min) << ' ' << format_exact(ckpt.norm.h_max) << ' '
      << format_exact(ckpt.norm.b_min) << ' ' << format_exact(ckpt.norm.b_max) << '\n';
  const auto names = tensor_names(ckpt.params.kind);
  for (std::size_t i = 0; i < ckpt.params.tensors.size(); ++i) {
    const auto& t = ckpt.params.tensors[i];
    out << "tensor " << names[i] << ' ' << t.rank() << ' ' << t.rows() << ' ' << t.cols();
    for (Index k = 0; k < t.size(); ++k) out << ' ' << format_exact(t.flat()(k));
    out << '\n';
  }
  if (!out) throw ConfigError("failed writing " + path.string());
}

namespace {

struct Reader {
  std::filesystem::path path;
  std::ifstream in;
  int line_no = 0;

  std::istringstream record(std::string_view key) {
    std::string line;
    if (!std::getline(in, line)) fail("missing '" + std::string(key) + "' record");
    ++line_no;
    std::istringstream ss(line);
    std::string word;
    ss >> word;
    if (word != key) fail("expected '" + std::string(key) + "', found '" + word + "'");
    return ss;
  }

  std::string word(std::istringstream& ss, std::string_view what) {
    std::string w;
    if (!(ss >> w)) fail("missing " + std::string(what));
    return w;
  }

  double real(std::istringstream& ss, std::string_view what) { return parse_double(word(ss, what), where()); }

  long long integer(std::istringstream& ss, std::string_view what) {
    const auto w = word(ss, what);
    long long v = 0;
    const auto [p, ec] = std::from_chars(w.data(), w.data() + w.size(), v);
    if (ec != std::errc{} || p != w.data() + w.size()) fail("bad " + std::string(what) + " '" + w + "'");
    return v;
  }

  std::string where() const { return path.string() + ":" + std::to_string(line_no); }

  [[noreturn]] void fail(const std::string& msg) const { throw ConfigError(where() + ": " + msg); }
};

}  // namespace

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  Reader r{path, std::ifstream(path), 0};
  if (!r.in) throw ConfigError("cannot open checkpoint " + path.string());

  auto ss = r.record("kind");
  const auto kind_name = r.word(ss, "cell kind");
  const auto kind = parse_cell_kind(kind_name);
  if (!kind) r.fail("unknown cell kind '" + kind_name + "'");

  ss = r.record("hidden");
  const auto hidden = r.integer(ss, "hidden size");
  if (hidden < 1) r.fail("hidden size must be positive");

  ss = r.record("dt");
  const double dt = r.real(ss, "dt");

  Checkpoint ck;
  ss = r.record("seed");
  const auto seed_text = r.word(ss, "seed");
  const auto [p, ec] = std::from_chars(seed_text.data(), seed_text.data() + seed_text.size(), ck.seed);
  if (ec != std::errc{} || p != seed_text.data() + seed_text.size()) r.fail("bad seed '" + seed_text + "'");

  ss = r.record("norm");
  ck.norm = {r.real(ss, "h_min"), r.real(ss, "h_max"), r.real(ss, "b_min"), r.real(ss, "b_max")};

  ck.params = zero_params<double>(*kind, hidden, dt);
  const auto names = tensor_names(*kind);
  for (std::size_t i = 0; i < ck.params.tensors.size(); ++i) {
    ss = r.record("tensor");
    const auto name = r.word(ss, "tensor name");
    if (name != names[i]) r.fail("expected tensor '" + std::string(names[i]) + "', found '" + name + "'");
    auto& t = ck.params.tensors[i];
    const auto rank = r.integer(ss, "rank");
    const auto rows = r.integer(ss, "rows");
    const auto cols = r.integer(ss, "cols");
    if (rank != t.rank() || rows != t.rows() || cols != t.cols()) {
      r.fail("tensor '" + name + "' has shape " + std::to_string(rows) + "x" + std::to_string(cols) + ", expected " +
             t.shape_string());
    }
    for (Index k = 0; k < t.size(); ++k) t.flat()(k) = r.real(ss, "tensor value");
    std::string extra;
    if (ss >> extra) r.fail("too many values for tensor '" + name + "'");
  }
  try {
    validate(ck.params);
    ck.norm.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return ck;
}

}  // namespace hyst
