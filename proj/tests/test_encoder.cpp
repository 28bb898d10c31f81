#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mcrcf/encoder.hpp"
#include "support.hpp"

using namespace mcrcf;

namespace {

TermId p(Id id) { return {Sign::positive, id}; }
TermId n(Id id) { return {Sign::negative, id}; }

std::string render(const TermVector& terms) {
  std::string out;
  for (const auto& t : terms) {
    for (std::uint32_t k = 0; k < t.freq; ++k) out += (out.empty() ? "" : " ") + t.term.str();
  }
  return out;
}

}  // namespace

TEST(TermId, SerializedForm) {
  EXPECT_EQ(p(37).str(), "p37");
  EXPECT_EQ(n(24).str(), "n24");
  EXPECT_EQ(p(37).flipped(), n(37));
}

TEST(EncodeProfile, SingleItemRunningExample) {
  std::vector<Rated> profile{{37, 4}};
  auto doc = encode_profile(1, profile, 3.95, 100);
  ASSERT_EQ(doc.prate.size(), 1u);
  EXPECT_EQ(doc.prate[0].term, p(37));
  EXPECT_EQ(doc.prate[0].freq, 5u);
  EXPECT_EQ(render(doc.prate), "p37 p37 p37 p37 p37");
}

TEST(EncodeProfile, TwoItemRunningExample) {
  std::vector<Rated> profile{{37, 4}, {24, 3.91}};
  auto doc = encode_profile(1, profile, 3.95, 100);
  EXPECT_EQ(doc.prate, (TermVector{{n(24), 4}, {p(37), 5}}));
  EXPECT_EQ(doc.nrate, (TermVector{{p(24), 4}, {n(37), 5}}));
  EXPECT_DOUBLE_EQ(doc.norm, std::sqrt(41.0));
  EXPECT_DOUBLE_EQ(doc.stored_mean, 3.95);
}

TEST(EncodeProfile, ZeroMcrIsOmitted) {
  std::vector<Rated> profile{{1, 3}};
  auto doc = encode_profile(1, profile, 3.0, 100);
  EXPECT_TRUE(doc.prate.empty());
  EXPECT_TRUE(doc.nrate.empty());
  EXPECT_EQ(doc.norm, 0.0);
}

TEST(EncodeProfile, SubResolutionMcrIsDropped) {
  std::vector<Rated> profile{{1, 3}, {2, 4}};
  auto doc = encode_profile(1, profile, 3.004, 100);
  EXPECT_EQ(doc.prate, (TermVector{{p(2), 99}}));
}

TEST(EncodeQuery, RunningExampleQuery) {
  // mean 3.0: item 37 rated 3.03 (+0.03), item 24 rated 3.06 (+0.06)
  std::vector<Rated> profile{{37, 3.03}, {24, 3.06}};
  auto q = encode_query(profile, 3.0, 100);
  EXPECT_EQ(q, (TermVector{{p(24), 6}, {p(37), 3}}));
  EXPECT_EQ(render(TermVector{{p(37), 3}, {p(24), 6}}), "p37 p37 p37 p24 p24 p24 p24 p24 p24");
}

TEST(EncodeQuery, ZeroAndNegative) {
  std::vector<Rated> zero{{5, 2}};
  EXPECT_TRUE(encode_query(zero, 2.0, 100).empty());
  std::vector<Rated> neg{{8, 1}};
  EXPECT_EQ(encode_query(neg, 3.5, 100), (TermVector{{n(8), 250}}));
}

TEST(EncodeQuery, RejectsBadScaleFactor) {
  std::vector<Rated> profile{{1, 4}};
  EXPECT_THROW(encode_query(profile, 3.0, 0), std::invalid_argument);
  EXPECT_THROW(encode_query(profile, 3.0, kMaxScaleFactor + 1), std::invalid_argument);
}

TEST(EncodeQuery, TruncatesTowardZero) {
  std::vector<Rated> profile{{1, 4}};
  // |4 - 3.3333...| * 100 = 66.67 -> 66, not 67
  EXPECT_EQ(encode_query(profile, 10.0 / 3.0, 100), (TermVector{{p(1), 66}}));
}

// Invariants over random profiles: prefix-flip duality, frequency bound,
// sign recovery, and exactness when MCRs are multiples of 1/scale_factor.
TEST(EncoderProperties, RandomProfiles) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> rate(1, 5);
  std::uniform_int_distribution<int> len(1, 40);
  const RatingScale scale = kScaleMl100k;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Rated> profile;
    int count = len(rng);
    double sum = 0.0;
    for (int i = 0; i < count; ++i) {
      profile.push_back({static_cast<Id>(i * 3 + 1), static_cast<double>(rate(rng))});
      sum += profile.back().rating;
    }
    double mean = sum / count;
    std::uint32_t sf = (trial % 2 == 0) ? 100 : 1'000'000;
    auto doc = encode_profile(7, profile, mean, sf);

    EXPECT_EQ(flipped(doc.prate), doc.nrate);
    EXPECT_DOUBLE_EQ(euclidean_norm(doc.prate), euclidean_norm(doc.nrate));
    EXPECT_EQ(doc.norm > 0.0, !doc.prate.empty());
    for (const auto& t : doc.prate) {
      EXPECT_GE(t.freq, 1u);
      EXPECT_LE(t.freq, (scale.max - scale.min) * sf);
      auto it = std::find_if(profile.begin(), profile.end(), [&](const Rated& r) { return r.id == t.term.raw_id; });
      ASSERT_NE(it, profile.end());
      double centered = it->rating - mean;
      EXPECT_EQ(t.term.sign, centered > 0 ? Sign::positive : Sign::negative);
    }
  }
}

TEST(EncoderProperties, ScaleFactorExactness) {
  // 100 ratings: the mean, and so every MCR, is a multiple of 0.01.
  auto data = mcrcf::testing::dense_corpus(5, 100, 77);
  auto means = compute_means(data);
  for (Id u : data.users()) {
    auto doc = encode_profile(u, data.user_profile(u), *means.user(u), 100);
    for (const auto& t : doc.prate) {
      double expected = std::abs(*data.rating(u, t.term.raw_id) - *means.user(u));
      EXPECT_NEAR(t.freq / 100.0, expected, 1e-12);
    }
    std::size_t nonzero = 0;
    for (const auto& r : data.user_profile(u)) nonzero += std::abs(r.rating - *means.user(u)) > 1e-12;
    EXPECT_EQ(doc.prate.size(), nonzero);
  }
}
