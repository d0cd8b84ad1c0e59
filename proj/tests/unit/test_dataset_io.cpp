#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <numeric>
#include <set>

#include "purgelab/dataset.hpp"
#include "purgelab/error.hpp"
#include "purgelab/heom.hpp"
#include "purgelab/io.hpp"
#include "purgelab/random.hpp"
#include "purgelab/synthetic.hpp"
#include "test_support.hpp"

using namespace purgelab;
using purgelab::testkit::numeric_dataset;
using purgelab::testkit::random_dataset;

namespace {

DataErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const DataError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no DataError thrown";
  return DataErrorKind::malformed;
}

}  // namespace

TEST(Rng, SameSeedSameStream) {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(Rng, UniformIndexStaysInRange) {
  Rng rng(1);
  std::vector<int> hits(7, 0);
  for (int i = 0; i < 7000; ++i) ++hits[rng.uniform_index(7)];
  for (int h : hits) EXPECT_GT(h, 800);
}

TEST(Rng, Uniform01HalfOpen) {
  Rng rng(9);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform01();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
}

TEST(Rng, NormalMoments) {
  Rng rng(3);
  double sum = 0, sq = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    sum += z;
    sq += z * z;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.01);
  EXPECT_NEAR(sq / n, 1.0, 0.02);
}

TEST(Rng, MixSeedOrderMatters) {
  EXPECT_NE(mix_seed({1, 2}), mix_seed({2, 1}));
  EXPECT_EQ(mix_seed({1, 2}), mix_seed({1, 2}));
  EXPECT_NE(fnv1a64("a"), fnv1a64("b"));
}

TEST(Csv, ParsesNumericAndCategoricalColumns) {
  const auto d = parse_csv("x,colour,class\n1.5,red,yes\n?,blue,no\n3,red,yes\n", "t", LabelColumn{"class"});
  ASSERT_EQ(d.size(), 3u);
  EXPECT_TRUE(d.attribute(0).is_numeric());
  EXPECT_TRUE(d.attribute(1).is_categorical());
  EXPECT_EQ(d.attribute(1).values, (std::vector<std::string>{"red", "blue"}));
  EXPECT_EQ(d.class_names(), (std::vector<std::string>{"yes", "no"}));
  EXPECT_TRUE(is_missing(d.instance(1).values[0]));
  EXPECT_EQ(d.instance(1).label, 1u);
}

TEST(Csv, LabelByPositionAndLastColumnDefault) {
  const auto a = parse_csv("class,x\nA,1\nB,2\n", "t", LabelColumn{std::size_t{0}});
  EXPECT_EQ(a.attribute_count(), 1u);
  EXPECT_EQ(a.class_attribute(), "class");
}

TEST(Csv, QuotedFields) {
  const auto d = parse_csv("name,class\n\"a, b\",X\n\"say \"\"hi\"\"\",Y\n", "t", LabelColumn{"class"});
  EXPECT_EQ(d.attribute(0).values[0], "a, b");
  EXPECT_EQ(d.attribute(0).values[1], "say \"hi\"");
}

TEST(Csv, Errors) {
  EXPECT_EQ(kind_of([] { parse_csv("x,class\n1,A\n2\n", "t", LabelColumn{"class"}); }),
            DataErrorKind::ragged_row);
  EXPECT_EQ(kind_of([] { parse_csv("x,class\n1,A\n2,?\n", "t", LabelColumn{"class"}); }),
            DataErrorKind::missing_label);
  EXPECT_EQ(kind_of([] { parse_csv("x,class\n1,A\n", "t", LabelColumn{"nope"}); }),
            DataErrorKind::unknown_column);
  EXPECT_EQ(kind_of([] { parse_csv("x,class\n\"1,A\n", "t", LabelColumn{"class"}); }),
            DataErrorKind::malformed);
  EXPECT_EQ(kind_of([] { load_csv("/nonexistent/file.csv"); }), DataErrorKind::unreadable_file);
}

TEST(Csv, SingleClassIsDegenerate) {
  EXPECT_EQ(kind_of([] { parse_csv("x,class\n1,A\n2,A\n", "t", LabelColumn{"class"}); }),
            DataErrorKind::degenerate);
}

TEST(Csv, RoundTripIsExact) {
  const auto d = random_dataset(5, 40, 3, 2, 3, 0.1);
  const std::string text = to_csv(d);
  const auto back = parse_csv(text, d.name(), LabelColumn{d.class_attribute()}, hints_from_schema(d));
  EXPECT_EQ(back, d);
  EXPECT_EQ(to_csv(back), text);
}

TEST(Csv, ShortestRealFormatting) {
  EXPECT_EQ(format_real(0.1), "0.1");
  EXPECT_EQ(format_real(2.0), "2");
  EXPECT_EQ(std::stod(format_real(1.0 / 3.0)), 1.0 / 3.0);
}

TEST(Arff, ParsesDenseSubset) {
  const std::string text =
      "% comment\n@relation weather\n@attribute outlook {sunny, rainy}\n@attribute temp numeric\n"
      "@attribute play {yes,no}\n@data\nsunny,85,no\nrainy,?,yes\n'sunny',70,yes\n";
  const auto d = parse_arff(text, "fallback");
  EXPECT_EQ(d.name(), "weather");
  EXPECT_EQ(d.size(), 3u);
  EXPECT_EQ(d.class_names(), (std::vector<std::string>{"yes", "no"}));
  EXPECT_TRUE(is_missing(d.instance(1).values[1]));
  EXPECT_EQ(d.instance(2).values[0], 0.0);
}

TEST(Arff, ClassAttributeByName) {
  const auto d = parse_arff("@relation r\n@attribute Class {a,b}\n@attribute x real\n@data\na,1\nb,2\n", "f");
  EXPECT_EQ(d.attribute_count(), 1u);
  EXPECT_EQ(d.instance(1).label, 1u);
}

TEST(Arff, UnsupportedAndMalformed) {
  EXPECT_EQ(kind_of([] { parse_arff("@relation r\n@attribute s string\n@attribute c {a,b}\n@data\n", "f"); }),
            DataErrorKind::unsupported_feature);
  EXPECT_EQ(kind_of([] { parse_arff("@relation r\n@attribute x real\n@attribute c {a,b}\n@data\n{0 1}\n", "f"); }),
            DataErrorKind::unsupported_feature);
  EXPECT_EQ(kind_of([] { parse_arff("@attribute x real\n@relation r\n", "f"); }), DataErrorKind::malformed);
  EXPECT_EQ(kind_of([] { parse_arff("@relation r\n@attribute x real\n@attribute c {a,b}\n@data\n1,z\n", "f"); }),
            DataErrorKind::undeclared_value);
  EXPECT_EQ(kind_of([] { parse_arff("@relation r\n@attribute x real\n@attribute c {a,b}\n@data\n1\n", "f"); }),
            DataErrorKind::ragged_row);
}

TEST(Arff, RoundTrip) {
  const auto d = random_dataset(8, 30, 2, 2, 2, 0.1);
  const auto back = parse_arff(to_arff(d), "x");
  EXPECT_EQ(back.instances(), d.instances());
  EXPECT_EQ(back.attributes(), d.attributes());
  EXPECT_EQ(back.class_names(), d.class_names());
}

TEST(Dataset, SchemaChecks) {
  EXPECT_THROW(numeric_dataset({{1.0}}, {0}, {"A"}), DataError);
  EXPECT_THROW(numeric_dataset({{1.0}, {2.0, 3.0}}, {0, 1}), DataError);
  EXPECT_THROW(numeric_dataset({{1.0}}, {5}), DataError);
}

TEST(Dataset, SubsetAndCounts) {
  const auto d = numeric_dataset({{0}, {1}, {2}, {3}}, {0, 1, 1, 1});
  EXPECT_EQ(d.class_counts(), (std::vector<std::size_t>{1, 3}));
  const std::vector<std::size_t> idx{3, 0};
  const auto s = d.subset(idx);
  EXPECT_EQ(s.instance(0).values[0], 3.0);
  EXPECT_EQ(s.class_count(), 2u);
}

TEST(Folds, StratifiedPartitionProperties) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto d = random_dataset(seed, 97, 2, 0, 3);
    const auto plan = stratified_folds(d, 10, seed);
    std::vector<std::size_t> all;
    std::vector<std::size_t> sizes;
    for (std::size_t f = 0; f < 10; ++f) {
      const auto test = plan.test_indices(f);
      const auto train = plan.train_indices(f);
      EXPECT_EQ(test.size() + train.size(), d.size());
      sizes.push_back(test.size());
      all.insert(all.end(), test.begin(), test.end());
    }
    std::sort(all.begin(), all.end());
    std::vector<std::size_t> expect(d.size());
    std::iota(expect.begin(), expect.end(), std::size_t{0});
    EXPECT_EQ(all, expect);
    const auto [lo, hi] = std::minmax_element(sizes.begin(), sizes.end());
    EXPECT_LE(*hi - *lo, 1u);
    // per class, fold counts differ by at most one
    for (std::size_t c = 0; c < d.class_count(); ++c) {
      std::vector<std::size_t> per(10, 0);
      for (std::size_t i = 0; i < d.size(); ++i) {
        if (d.instance(i).label == c) ++per[plan.assignment()[i]];
      }
      const auto [a, b] = std::minmax_element(per.begin(), per.end());
      EXPECT_LE(*b - *a, 1u);
    }
    EXPECT_EQ(plan, stratified_folds(d, 10, seed));
  }
}

TEST(Folds, Errors) {
  const auto d = numeric_dataset({{0}, {1}, {2}}, {0, 1, 1});
  EXPECT_THROW(stratified_folds(d, 1, 0), std::invalid_argument);
  EXPECT_THROW(stratified_folds(d, 4, 0), std::invalid_argument);
}

TEST(Heom, MixedAttributes) {
  const HeomMetric m({AttributeKind::numeric, AttributeKind::categorical},
                     {NumericRange{0.0, 10.0}, std::nullopt});
  EXPECT_DOUBLE_EQ(m.distance(std::vector<double>{0, 1}, std::vector<double>{5, 1}), 0.5);
  EXPECT_DOUBLE_EQ(m.distance(std::vector<double>{0, 1}, std::vector<double>{0, 2}), 1.0);
  EXPECT_DOUBLE_EQ(m.distance(std::vector<double>{kMissing, 1}, std::vector<double>{3, 2}), std::sqrt(2.0));
  const HeomMetric flat({AttributeKind::numeric}, {NumericRange{2.0, 2.0}});
  EXPECT_EQ(flat.attribute_distance(0, 2.0, 2.0), 0.0);
  EXPECT_EQ(flat.attribute_distance(0, 2.0, 3.0), 1.0);
}

TEST(Synthetic, BlobsShapeAndDeterminism) {
  BlobOptions o;
  o.class_count = 3;
  o.per_class = 20;
  o.dimension = 4;
  o.seed = 11;
  const auto a = make_blobs(o);
  EXPECT_EQ(a.size(), 60u);
  EXPECT_EQ(a.attribute_count(), 4u);
  EXPECT_EQ(a.class_counts(), (std::vector<std::size_t>{20, 20, 20}));
  EXPECT_EQ(a, make_blobs(o));
  o.seed = 12;
  EXPECT_NE(a, make_blobs(o));
}

TEST(Synthetic, NoiseInjectionCorruptsExactCount) {
  BlobOptions o;
  o.class_count = 4;
  o.per_class = 25;
  const auto clean = make_blobs(o);
  const auto noisy = inject_label_noise(clean, 0.25, 5);
  EXPECT_EQ(noisy.corrupted.size(), 25u);
  EXPECT_TRUE(std::is_sorted(noisy.corrupted.begin(), noisy.corrupted.end()));
  std::set<std::size_t> bad(noisy.corrupted.begin(), noisy.corrupted.end());
  for (std::size_t i = 0; i < clean.size(); ++i) {
    if (bad.count(i)) {
      EXPECT_NE(noisy.data.instance(i).label, clean.instance(i).label);
    } else {
      EXPECT_EQ(noisy.data.instance(i).label, clean.instance(i).label);
    }
  }
  EXPECT_THROW(inject_label_noise(clean, 1.5, 0), std::invalid_argument);
}
