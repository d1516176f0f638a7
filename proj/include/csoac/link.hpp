#pragma once

// End-to-end MV links: encode every sensor's vote vector, pass the K
// transmissions through one channel use, detect all MVs at the receiver.

#include <memory>
#include <string>
#include <vector>

#include "csoac/channel.hpp"
#include "csoac/cs_core.hpp"
#include "csoac/detect.hpp"
#include "csoac/rng.hpp"

namespace csoac {

class MajorityVoteLink {
 public:
  virtual ~MajorityVoteLink() = default;

  /// MV slots per channel use.
  virtual std::size_t m() const = 0;
  /// Complex subcarriers consumed per channel use.
  virtual std::size_t subcarriers() const = 0;
  virtual std::string name() const = 0;
  /// Detected MV in {-1, 0, +1} for each of the m columns of `votes`.
  virtual std::vector<int> compute(const VoteMatrix& votes, Rng& rng) const = 0;
};

struct ProposedLinkConfig {
  std::size_t m = 8;
  double xi = kXiInfinite;
  int modulus = 2;
  ChannelModel channel;
  TieMode tie = TieMode::random;
};

/// Complementary-sequence scheme: shared permutation (m, m-1, ..., 1), fresh
/// phase coefficients per sensor per call, fresh channel per call.
class ProposedLink final : public MajorityVoteLink {
 public:
  explicit ProposedLink(ProposedLinkConfig cfg) : cfg_(cfg), layout_(cfg.m) {}
  ProposedLink(ProposedLinkConfig cfg, Permutation pi) : cfg_(cfg), layout_(std::move(pi)) {
    cfg_.m = layout_.m();
  }

  std::size_t m() const override { return cfg_.m; }
  std::size_t subcarriers() const override { return layout_.length(); }
  std::string name() const override { return "proposed"; }
  const SequenceLayout& layout() const noexcept { return layout_; }
  const ProposedLinkConfig& config() const noexcept { return cfg_; }

  /// The superposed subcarrier vector for one channel use.
  CVec received(const VoteMatrix& votes, Rng& rng) const {
    if (votes.m() != cfg_.m) throw std::invalid_argument("ProposedLink: vote matrix has wrong number of MVs");
    std::vector<CVec> seqs;
    seqs.reserve(votes.sensors());
    for (std::size_t k = 0; k < votes.sensors(); ++k) {
      seqs.push_back(encode_votes(layout_, votes.row(k), cfg_.xi, cfg_.modulus, rng).elements);
    }
    return receive(seqs, cfg_.channel, rng);
  }

  std::vector<int> compute(const VoteMatrix& votes, Rng& rng) const override {
    const CVec r = received(votes, rng);
    return decide_all(r, layout_, cfg_.tie, &rng);
  }

 private:
  ProposedLinkConfig cfg_;
  SequenceLayout layout_;
};

struct BaselineLinkConfig {
  std::size_t m = 8;
  ChannelModel channel;
  BaselineAmplitude amplitude = BaselineAmplitude::power;
};

/// Power-modulated random sequences, one block of L subcarriers per MV.
class BaselineLink final : public MajorityVoteLink {
 public:
  explicit BaselineLink(BaselineLinkConfig cfg) : cfg_(cfg), layout_(goldenbaum_layout(cfg.m)) {}

  std::size_t m() const override { return cfg_.m; }
  std::size_t subcarriers() const override { return layout_.subcarriers(); }
  std::string name() const override { return "goldenbaum"; }
  const BaselineLayout& layout() const noexcept { return layout_; }

  std::vector<int> compute(const VoteMatrix& votes, Rng& rng) const override {
    if (votes.m() != cfg_.m) throw std::invalid_argument("BaselineLink: vote matrix has wrong number of MVs");
    std::vector<CVec> seqs;
    seqs.reserve(votes.sensors());
    for (std::size_t k = 0; k < votes.sensors(); ++k) {
      seqs.push_back(goldenbaum_transmit(votes.row(k), layout_, rng, cfg_.amplitude));
    }
    const CVec r = receive(seqs, cfg_.channel, rng);
    std::vector<int> out(cfg_.m);
    const std::span<const cplx> all(r);
    for (std::size_t n = 0; n < cfg_.m; ++n) {
      out[n] = goldenbaum_decode(all.subspan(layout_.offset(n), layout_.block_length), votes.sensors()).sign;
    }
    return out;
  }

 private:
  BaselineLinkConfig cfg_;
  BaselineLayout layout_;
};

}  // namespace csoac
