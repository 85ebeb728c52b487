#include "lh/generators.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "lh/rng.hpp"

namespace lh {

namespace {
[[noreturn]] void fail(const std::string& msg) { throw std::invalid_argument(msg); }

constexpr char kMagic[8] = {'L', 'H', 'S', 'E', 'Q', '0', '0', '1'};

std::vector<double> parse_args(const std::string& text) {
  auto lp = text.find('(');
  if (lp == std::string::npos) return {};
  auto rp = text.rfind(')');
  if (rp == std::string::npos || rp < lp) fail("generator: unbalanced parentheses in '" + text + "'");
  std::vector<double> args;
  std::string body = text.substr(lp + 1, rp - lp - 1);
  std::stringstream ss(body);
  std::string tok;
  while (std::getline(ss, tok, ','))
    if (!tok.empty()) args.push_back(std::stod(tok));
  return args;
}
}  // namespace

GeneratorSpec GeneratorSpec::parse(const std::string& text) {
  GeneratorSpec g;
  std::string head = text.substr(0, text.find('('));
  auto args = head == "file" ? std::vector<double>{} : parse_args(text);
  if (head == "constant") {
    g.kind = Kind::Constant;
    g.value = args.empty() ? 1.0 : args[0];
  } else if (head == "bernoulli") {
    g.kind = Kind::Bernoulli;
    g.p = args.empty() ? 0.5 : args[0];
  } else if (head == "shifting") {
    g.kind = Kind::Shifting;
    g.k = args.empty() ? 4 : static_cast<int>(args[0]);
    for (std::size_t i = 1; i < args.size(); ++i) g.means.push_back(args[i]);
  } else if (head == "sinusoid") {
    g.kind = Kind::Sinusoid;
    g.period = args.size() > 0 ? args[0] : 100.0;
    g.amplitude = args.size() > 1 ? args[1] : 1.0;
  } else if (head == "file") {
    g.kind = Kind::File;
    auto lp = text.find('(');
    auto rp = text.rfind(')');
    if (lp == std::string::npos || rp == std::string::npos || rp <= lp + 1)
      fail("generator: file(<path>) requires a path");
    g.path = text.substr(lp + 1, rp - lp - 1);
  } else if (head == "adversarial-lb") {
    g.kind = Kind::AdversarialLB;
    g.eps = args.empty() ? 0.1 : args[0];
  } else {
    fail("generator: unknown generator '" + head +
         "' (constant, bernoulli, shifting, sinusoid, file, adversarial-lb)");
  }
  return g;
}

std::string GeneratorSpec::name() const {
  switch (kind) {
    case Kind::Constant: return "constant";
    case Kind::Bernoulli: return "bernoulli";
    case Kind::Shifting: return "shifting";
    case Kind::Sinusoid: return "sinusoid";
    case Kind::File: return "file";
    case Kind::AdversarialLB: return "adversarial-lb";
  }
  return "?";
}

std::vector<double> generate(const GeneratorSpec& spec, std::uint64_t T, std::uint64_t seed) {
  std::vector<double> out;
  out.reserve(T);
  SplitMix64 rng(seed);
  switch (spec.kind) {
    case GeneratorSpec::Kind::Constant:
      out.assign(T, spec.value);
      break;
    case GeneratorSpec::Kind::Bernoulli:
      for (std::uint64_t t = 0; t < T; ++t) out.push_back(rng.pm1(spec.p));
      break;
    case GeneratorSpec::Kind::Shifting: {
      if (spec.k < 1) fail("generate: shifting needs k >= 1 intervals");
      std::uint64_t len = (T + spec.k - 1) / spec.k;
      for (std::uint64_t t = 0; t < T; ++t) {
        auto j = static_cast<std::size_t>(t / len);
        double mean = spec.means.empty()
                          ? (j % 2 == 0 ? 0.6 : -0.6)
                          : spec.means[j % spec.means.size()];
        out.push_back(rng.pm1(0.5 * (1.0 + mean)));
      }
      break;
    }
    case GeneratorSpec::Kind::Sinusoid:
      for (std::uint64_t t = 0; t < T; ++t)
        out.push_back(spec.amplitude *
                      std::sin(2.0 * M_PI * static_cast<double>(t + 1) / spec.period));
      break;
    case GeneratorSpec::Kind::File:
      out = read_sequence(spec.path);
      if (T > 0 && out.size() > T) out.resize(T);
      break;
    case GeneratorSpec::Kind::AdversarialLB:
      for (std::uint64_t t = 0; t < T; ++t) out.push_back(rng.pm1(0.5 * (1.0 + spec.eps)));
      break;
  }
  return out;
}

std::vector<double> read_sequence(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("read_sequence: cannot open '" + path + "'");
  char magic[8];
  in.read(magic, 8);
  std::vector<double> out;
  if (in.gcount() == 8 && std::memcmp(magic, kMagic, 8) == 0) {
    double v;
    while (in.read(reinterpret_cast<char*>(&v), sizeof v)) out.push_back(v);
  } else {
    in.clear();
    in.seekg(0);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      out.push_back(std::stod(line));
    }
  }
  for (double v : out)
    if (!std::isfinite(v) || std::fabs(v) > 1.0)
      fail("read_sequence: values must be reals in [-1, 1]");
  return out;
}

void write_sequence_text(const std::string& path, const std::vector<double>& seq) {
  std::ofstream out(path);
  if (!out) fail("write_sequence_text: cannot open '" + path + "'");
  out.precision(17);
  for (double v : seq) out << v << "\n";
}

void write_sequence_binary(const std::string& path, const std::vector<double>& seq) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("write_sequence_binary: cannot open '" + path + "'");
  out.write(kMagic, 8);
  for (double v : seq) out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::vector<std::vector<double>> shifting_strategy_payoffs(int num_strategies, std::uint64_t T,
                                                           int k, double level, bool noise,
                                                           std::uint64_t seed) {
  if (num_strategies < 1 || k < 1) fail("shifting_strategy_payoffs: bad arguments");
  std::vector<std::vector<double>> payoffs(static_cast<std::size_t>(num_strategies));
  for (auto& s : payoffs) s.reserve(T);
  SplitMix64 rng(seed);
  std::uint64_t len = (T + k - 1) / static_cast<std::uint64_t>(k);
  for (std::uint64_t t = 0; t < T; ++t) {
    int dominant = static_cast<int>((t / len) % static_cast<std::uint64_t>(num_strategies));
    for (int i = 0; i < num_strategies; ++i) {
      double mean = i == dominant ? level : -level;
      double v = noise ? rng.pm1(0.5 * (1.0 + mean)) : (mean > 0 ? 1.0 : -1.0);
      payoffs[static_cast<std::size_t>(i)].push_back(v);
    }
  }
  return payoffs;
}

}  // namespace lh
