#include <gtest/gtest.h>

#include <random>

#include "eds/error.hpp"
#include "eds/series.hpp"

using namespace eds;

TEST(ParseCsv, HeaderExampleWithMissingCellAndLabels) {
  const auto f = parse_csv("Time,A,EVENT\n1,2.0,0\n2,,1\n");
  ASSERT_EQ(f.rows(), 2u);
  EXPECT_EQ(f.timestamps()[0].key, 1);
  EXPECT_EQ(f.timestamps()[1].key, 2);
  ASSERT_EQ(f.column_count(), 1u);
  EXPECT_EQ(f.column("A").view().at(0), 2.0);
  EXPECT_FALSE(f.column("A").view().at(1).has_value());
  EXPECT_EQ(f.labels(), (std::vector<bool>{false, true}));
}

TEST(ParseCsv, GeccoSchema) {
  const std::string text =
      "Time,Tp,Cl,pH,Redox,Leit,Trueb,Cl_2,Fm,EVENT\n"
      "2016-08-14 00:00:00,4.4,0.14,8.36,749,211,0.011,0.11,1518,FALSE\n"
      "2016-08-14 00:01:00,4.4,0.14,8.36,749,211,0.011,0.11,1545,TRUE\n";
  CsvOptions opts;
  opts.operational_columns = {"Tp", "Fm"};
  const auto f = parse_csv(text, opts);
  EXPECT_EQ(f.column_count(), 8u);
  EXPECT_TRUE(f.has_labels());
  EXPECT_EQ(f.timestamps()[1].key - f.timestamps()[0].key, 60);
  EXPECT_EQ(f.quality_columns().size(), 6u);

  const std::vector<std::string> quality{"Cl", "pH", "Redox", "Leit", "Trueb", "Cl_2"};
  const auto sel = select_columns(f, quality);
  EXPECT_EQ(sel.column_count(), 6u);
  EXPECT_EQ(sel.rows(), 2u);
  EXPECT_TRUE(sel.has_labels());
}

TEST(ParseCsv, SingleRowNoLabels) {
  const auto f = parse_csv("Time,X\n1,5.5\n");
  EXPECT_EQ(f.rows(), 1u);
  EXPECT_FALSE(f.has_labels());
  EXPECT_EQ(f.column("X").values[0], 5.5);
}

TEST(ParseCsv, CrlfQuotedFieldsAndGarbageCells) {
  const auto f = parse_csv("Time,\"A,1\",B\r\n1,abc,2\r\n2,3,\"4\"\r\n");
  EXPECT_EQ(f.column(0).name, "A,1");
  EXPECT_FALSE(f.column(0).view().at(0).has_value());
  EXPECT_EQ(f.column(1).values[1], 4.0);
}

TEST(ParseCsv, Errors) {
  EXPECT_THROW(parse_csv("Time,A,A\n1,2,3\n"), DataError);
  EXPECT_THROW(parse_csv("Time,A\n2,1\n1,1\n"), DataError);
  EXPECT_THROW(parse_csv("Time,A\n"), DataError);
  EXPECT_THROW(parse_csv("Time,A\nnoon,1\n"), DataError);
  EXPECT_THROW(parse_csv("Time,A,EVENT\n1,1,maybe\n"), DataError);
  EXPECT_THROW(parse_csv(""), DataError);
}

TEST(ParseTimestamp, Formats) {
  EXPECT_EQ(parse_timestamp("2016-08-14 00:00:00")->key, parse_timestamp("2016-08-14T00:00:00Z")->key);
  EXPECT_EQ(parse_timestamp("1970-01-02")->key, 86400);
  EXPECT_EQ(parse_timestamp("-5")->key, -5);
  EXPECT_FALSE(parse_timestamp("2016-13-01").has_value());
  EXPECT_FALSE(parse_timestamp("12.5").has_value());
}

TEST(SelectColumns, SubsetAndErrors) {
  const auto f = parse_csv("Time,A,B,EVENT\n1,1,2,1\n2,3,4,0\n");
  const std::vector<std::string> a{"A"};
  const auto s = select_columns(f, a);
  EXPECT_EQ(s.column_count(), 1u);
  EXPECT_EQ(s.column(0).name, "A");
  EXPECT_EQ(s.labels(), f.labels());
  EXPECT_THROW(select_columns(f, std::vector<std::string>{}), DataError);
  EXPECT_THROW(select_columns(f, std::vector<std::string>{"Z"}), DataError);
}

TEST(SliceWindow, BoundsAndNoAliasing) {
  const auto f = parse_csv("Time,A\n1,10\n2,11\n3,12\n4,13\n5,14\n");
  const auto w = slice_window(f, 0, 3);
  EXPECT_EQ(w.size(), 3u);
  EXPECT_EQ(w.column(0).values.back(), 12.0);
  EXPECT_THROW(slice_window(f, 3, 3), DataError);
  EXPECT_THROW(slice_window(f, 0, 0), DataError);

  const auto mid = slice_window(f, 1, 2);
  EXPECT_EQ(mid.column(0).values.data(), f.column(0).values.data() + 1);
  EXPECT_EQ(mid.column(0).size(), 2u);
}

TEST(SliceWindow, SteppedTilingOfThousandRows) {
  std::vector<Timestamp> ts;
  Column c{"A"};
  for (int i = 0; i < 1000; ++i) {
    ts.push_back({std::to_string(i), i});
    c.push(static_cast<double>(i));
  }
  const auto f = SeriesFrame::make(ts, {c});

  // Index arithmetic oracle: windows of `size` rows stepping by 5 from 0.
  const std::size_t step = 5, size = 5;
  std::size_t count = 0, expected_start = 0;
  for (std::size_t s = 0; s + size <= f.rows(); s += step) {
    const auto w = slice_window(f, s, size);
    EXPECT_EQ(w.start(), expected_start);
    EXPECT_EQ(w.column(0).values.front(), static_cast<double>(s));
    expected_start += step;
    ++count;
  }
  EXPECT_EQ(count, 200u);

  // Larger windows overlap their successor by size - step rows.
  const auto a = slice_window(f, 0, 20), b = slice_window(f, 5, 20);
  EXPECT_EQ(a.end() - b.start(), 15u);
}

TEST(EmitCsv, MissingCellIsEmptyAndRoundTrips) {
  const std::string text = "Time,A,EVENT\n1,2,0\n2,,1\n";
  const auto f = parse_csv(text);
  const std::string out = emit_csv(f, true);
  EXPECT_EQ(out, text);
  EXPECT_EQ(out.find("NaN"), std::string::npos);
  EXPECT_EQ(parse_csv(out), f);
}

TEST(EmitCsv, RandomFrameRoundTripsBitExact) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  std::uniform_int_distribution<int> exp(-300, 300);
  std::bernoulli_distribution missing(0.05), label(0.1);
  std::vector<Timestamp> ts;
  std::vector<Column> cols{{"A"}, {"B"}, {"C"}};
  std::vector<bool> labels;
  for (int i = 0; i < 10000; ++i) {
    ts.push_back({std::to_string(i * 60), i * 60});
    for (std::size_t k = 0; k < cols.size(); ++k) {
      if (missing(rng)) {
        cols[k].push(std::nullopt);
      } else {
        const double v = k == 2 ? std::ldexp(u(rng), exp(rng)) : u(rng);
        cols[k].push(v);
      }
    }
    labels.push_back(label(rng));
  }
  const auto f = SeriesFrame::make(ts, cols, labels);
  const auto g = parse_csv(emit_csv(f, true));
  ASSERT_EQ(g, f);
  for (std::size_t k = 0; k < cols.size(); ++k)
    for (std::size_t r = 0; r < f.rows(); ++r)
      if (f.column(k).observed[r]) ASSERT_EQ(std::bit_cast<std::uint64_t>(f.column(k).values[r]),
                                             std::bit_cast<std::uint64_t>(g.column(k).values[r]));
}
