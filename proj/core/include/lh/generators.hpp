// Payoff-sequence generators for experiments and probes.  Deterministic
// given (spec, seed).
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace lh {

struct GeneratorSpec {
  enum class Kind { Constant, Bernoulli, Shifting, Sinusoid, File, AdversarialLB };
  Kind kind = Kind::Constant;
  double value = 1.0;        // Constant
  double p = 0.5;            // Bernoulli: P(+1)
  int k = 4;                 // Shifting: number of intervals
  std::vector<double> means; // Shifting: per-interval mean of +-1 draws
  double period = 100.0;     // Sinusoid
  double amplitude = 1.0;
  std::string path;          // File
  double eps = 0.1;          // AdversarialLB: Ber(+-1, (1+eps)/2)

  static GeneratorSpec parse(const std::string& text);  // "bernoulli(0.5)" etc.
  std::string name() const;
};

std::vector<double> generate(const GeneratorSpec& spec, std::uint64_t T, std::uint64_t seed);

// Sequence files: plain text one real per line, or binary little-endian
// doubles behind the 8-byte magic "LHSEQ001".
std::vector<double> read_sequence(const std::string& path);
void write_sequence_text(const std::string& path, const std::vector<double>& seq);
void write_sequence_binary(const std::string& path, const std::vector<double>& seq);

// Per-strategy +-1 payoff streams where strategy `dominant(j)` has mean
// +level on interval j and every strategy has mean -level elsewhere;
// deterministic level when noise == false.
std::vector<std::vector<double>> shifting_strategy_payoffs(int num_strategies, std::uint64_t T,
                                                           int k, double level, bool noise,
                                                           std::uint64_t seed);

}  // namespace lh
