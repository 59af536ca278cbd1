#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>

#include "cwfield/config.hpp"
#include "cwfield/law_io.hpp"

using namespace cwfield;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "cwfield_tests";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST(Config, DefaultsRoundTrip) {
  ExperimentConfig c;
  c.schema_version = 1;
  const auto back = ExperimentConfig::from_text(c.to_text());
  EXPECT_EQ(back, c);
}

TEST(Config, FullRoundTrip) {
  ExperimentConfig c;
  c.alpha = {"golden", "sqrt2"};
  c.x = {0.1, 0.7000000000000001};
  c.field = "two-point:0.25";
  c.beta = {0.5, 1.3333333333333333, 2.0};
  c.J = 0.75;
  c.n = {100, 1000, 4000};
  c.seeds = {1, 18446744073709551615ULL};
  c.out = "results/run1";
  c.tol["ks"] = 0.05;
  c.tol["var_rel"] = 1e-3;
  const auto text = c.to_text();
  EXPECT_EQ(ExperimentConfig::from_text(text), c);
}

TEST(Config, ParsesCommentsAndWhitespace) {
  const auto c = ExperimentConfig::from_text(
      "# experiment\n"
      "schema_version = 1\n"
      "  alpha = 0.25   # dyadic\n"
      "beta=1,1.5\n"
      "n = 10 , 20\n"
      "tol.ks = 0.07\n");
  EXPECT_EQ(c.alpha, std::vector<std::string>{"0.25"});
  EXPECT_EQ(c.beta, (std::vector<double>{1.0, 1.5}));
  EXPECT_EQ(c.n, (std::vector<std::size_t>{10, 20}));
  EXPECT_EQ(c.tolerance("ks", 0.05), 0.07);
  EXPECT_EQ(c.tolerance("delta", 0.1), 0.1);
  EXPECT_DOUBLE_EQ(c.rotation().angles()[0], 0.25);
}

TEST(Config, ValidationErrors) {
  EXPECT_THROW(ExperimentConfig::from_text("alpha = golden\n"), ConfigError);
  EXPECT_THROW(ExperimentConfig::from_text("schema_version = 2\n"), ConfigError);
  EXPECT_THROW(ExperimentConfig::from_text("schema_version = 1\nn = 100, 50\n"), ConfigError);
  EXPECT_THROW(ExperimentConfig::from_text("schema_version = 1\nn = 0\n"), ConfigError);
  EXPECT_THROW(ExperimentConfig::from_text("schema_version = 1\nbeta = -1\n"), ConfigError);
  EXPECT_THROW(ExperimentConfig::from_text("schema_version = 1\nJ = 0\n"), ConfigError);
  EXPECT_THROW(ExperimentConfig::from_text("schema_version = 1\nalpha = 1.5\n"), ConfigError);
  EXPECT_THROW(ExperimentConfig::from_text("schema_version = 1\nalpha = golden, sqrt2\n"), ConfigError);
  EXPECT_THROW(ExperimentConfig::from_text("schema_version = 1\ncolour = red\n"), ConfigError);
  EXPECT_THROW(ExperimentConfig::from_text("schema_version = 1\nbeta = one\n"), ConfigError);
  EXPECT_THROW(ExperimentConfig::from_text("schema_version = 1\njust words\n"), ConfigError);
  EXPECT_THROW(ExperimentConfig::load("/nonexistent/cwfield.cfg"), ConfigError);
}

TEST(Config, FieldSpecifications) {
  ExperimentConfig c;
  c.field = "half";
  EXPECT_EQ(c.field_function()(0.3), 0.5);
  c.field = "two-point:0.1";
  EXPECT_EQ(c.field_function()(0.7), 0.9);
  EXPECT_EQ(c.distribution().atoms().size(), 2u);
  c.field = "mystery";
  EXPECT_THROW(c.field_function(), ConfigError);

  const auto table = scratch("table.txt");
  {
    std::ofstream os(table);
    os << "0.0 1.0\n0.5\n";
  }
  c.field = "table:" + table.string();
  const auto f = c.field_function();
  EXPECT_DOUBLE_EQ(f(0.25), 0.5);
  EXPECT_DOUBLE_EQ(f.variation(), 1.5);
  EXPECT_NEAR(c.distribution().moments().mean, 0.625, 1e-12);
  c.field = "table:" + (scratch("missing.txt")).string();
  EXPECT_THROW(c.field_function(), ConfigError);
}

TEST(Config, ExactAngles) {
  EXPECT_TRUE(std::holds_alternative<QuadraticIrrational>(ExperimentConfig::exact_angle("golden")));
  const auto r = std::get<Rational>(ExperimentConfig::exact_angle("0.25"));
  EXPECT_EQ(r.num, 1);
  EXPECT_EQ(r.den, 4);
}

TEST(Csv, RoundTripFormatting) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0}) EXPECT_EQ(std::stod(fmt17(v)), v);
  EXPECT_EQ(fmt17(std::numeric_limits<double>::quiet_NaN()), "nan");
  EXPECT_EQ(fmt17(-std::numeric_limits<double>::infinity()), "-inf");
  EXPECT_EQ(csv_row({"a", "b", "c"}), "a,b,c\n");
}

TEST(LawCache, RoundTripAndKeyMismatch) {
  const auto field = field_sequence(TorusRotation::golden(), FieldFunction::identity(), 0.0, 200);
  const ModelParams params{1.25, 0.8};
  const auto path = scratch("law.bin").string();
  std::remove(path.c_str());
  const auto law = cached_gibbs_pmf(path, field, params);
  ASSERT_TRUE(fs::exists(path));
  const auto back = read_law_cache(path, field, params);
  ASSERT_TRUE(back.has_value());
  EXPECT_EQ(back->log_mass, law.log_mass);
  EXPECT_EQ(back->n, 200u);
  EXPECT_FALSE(read_law_cache(path, field, ModelParams{1.25, 0.9}).has_value());
  auto other = field;
  other.p[17] = std::nextafter(other.p[17], 1.0);
  EXPECT_FALSE(read_law_cache(path, other, params).has_value());
  EXPECT_FALSE(read_law_cache(scratch("absent.bin").string(), field, params).has_value());
}

TEST(LawCache, RejectsCorruptFiles) {
  const auto field = make_field_sequence({0.5, 0.5, 0.5});
  const ModelParams params{1.0, 1.0};
  const auto path = scratch("corrupt.bin").string();
  write_law_cache(path, gibbs_pmf(field, params));
  fs::resize_file(path, fs::file_size(path) - 4);
  EXPECT_FALSE(read_law_cache(path, field, params).has_value());
  {
    std::ofstream os(path, std::ios::binary);
    os << "XXXXgarbage";
  }
  EXPECT_FALSE(read_law_cache(path, field, params).has_value());
}

TEST(LawCache, FieldHashIsSensitiveToValues) {
  const auto a = make_field_sequence({0.1, 0.2});
  const auto b = make_field_sequence({0.2, 0.1});
  EXPECT_NE(field_hash(a), field_hash(b));
  EXPECT_EQ(field_hash(a), field_hash(make_field_sequence({0.1, 0.2})));
}
