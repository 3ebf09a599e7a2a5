#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "modeclust/errors.hpp"
#include "modeclust/matrix.hpp"
#include "modeclust/rng.hpp"

using namespace modeclust;

namespace
{
double mean(std::span<const double> x)
{
  double s = 0;
  for (const double v : x)
  {
    s += v;
  }
  return s / static_cast<double>(x.size());
}

double cov(std::span<const double> x, std::span<const double> y)
{
  const double mx = mean(x), my = mean(y);
  double s = 0;
  for (std::size_t i = 0; i < x.size(); ++i)
  {
    s += (x[i] - mx) * (y[i] - my);
  }
  return s / static_cast<double>(x.size() - 1);
}
}  // namespace

TEST_CASE("csv round trip")
{
  std::istringstream in("a,b\n1,2.5\n-3,4e-2\n");
  const auto m = read_csv(in);
  CHECK(m.rows == 2);
  CHECK(m.cols == 2);
  CHECK(m.names == std::vector<std::string>{"a", "b"});
  CHECK(m.at(1, 0) == -3);
  CHECK(m.at(1, 1) == 0.04);
  std::ostringstream out;
  write_csv(out, m);
  std::istringstream back(out.str());
  const auto m2 = read_csv(back);
  CHECK(m2.values == m.values);
  CHECK(m2.names == m.names);
}

TEST_CASE("csv errors name the offending cell")
{
  const auto message = [](const std::string& text) {
    std::istringstream in(text);
    try
    {
      read_csv(in, "x.csv");
    }
    catch (const InputError& e)
    {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message("a,b\n1,NA\n").find("b") != std::string::npos);
  CHECK(message("a,b\n1,\n") != "");
  CHECK(message("a,b\n1,2\n3,foo\n").find("foo") != std::string::npos);
  CHECK(message("a,b\n1,2,3\n") != "");
  CHECK(message("") != "");
}

TEST_CASE("standardize centres and scales with the sample variance")
{
  DataMatrix two(2, 1);
  two.at(0, 0) = 0;
  two.at(1, 0) = 2;
  const auto s = standardize(two);
  CHECK(s.at(0, 0) == doctest::Approx(-std::sqrt(0.5)));
  CHECK(s.at(1, 0) == doctest::Approx(std::sqrt(0.5)));

  Rng rng(3);
  DataMatrix m(40, 4);
  for (auto& v : m.values)
  {
    v = rng.normal(5, 3);
  }
  const auto z = standardize(m);
  for (std::size_t j = 0; j < 4; ++j)
  {
    CHECK(std::abs(mean(z.column(j))) < 1e-12);
    CHECK(cov(z.column(j), z.column(j)) == doctest::Approx(1.0).epsilon(1e-9));
  }
  const auto again = standardize(z);
  for (std::size_t i = 0; i < z.values.size(); ++i)
  {
    CHECK(again.values[i] == doctest::Approx(z.values[i]).epsilon(1e-12));
  }
}

TEST_CASE("constant columns are reported by name")
{
  DataMatrix m(3, 3);
  m.names = {"x", "flat", "flat2"};
  m.at(0, 0) = 1;
  m.at(1, 0) = 2;
  try
  {
    standardize(m);
    FAIL("expected an error");
  }
  catch (const InputError& e)
  {
    const std::string what = e.what();
    CHECK(what.find("flat") != std::string::npos);
    CHECK(what.find("flat2") != std::string::npos);
  }
}

TEST_CASE("pca scores have diagonal covariance and keep total variance")
{
  DataMatrix m(5, 3);
  const double fixture[5][3] = {
      {2.5, 2.4, 0.5}, {0.5, 0.7, 1.9}, {2.2, 2.9, -0.3}, {1.9, 2.2, 0.8}, {3.1, 3.0, 0.1}};
  for (std::size_t i = 0; i < 5; ++i)
  {
    for (std::size_t j = 0; j < 3; ++j)
    {
      m.at(i, j) = fixture[i][j];
    }
  }
  const auto z = standardize(m);
  const auto r = pca_rotate(z, 3);
  double before = 0, after = 0;
  for (std::size_t a = 0; a < 3; ++a)
  {
    before += cov(z.column(a), z.column(a));
    after += cov(r.column(a), r.column(a));
    for (std::size_t b = 0; b < a; ++b)
    {
      CHECK(std::abs(cov(r.column(a), r.column(b))) < 1e-8);
    }
    if (a > 0)
    {
      CHECK(cov(r.column(a), r.column(a)) <= cov(r.column(a - 1), r.column(a - 1)) + 1e-12);
    }
  }
  CHECK(after == doctest::Approx(before).epsilon(1e-6));
  CHECK(r.names[0] == "PC1");
  CHECK_THROWS_AS(pca_rotate(z, 4), InputError);
  CHECK_THROWS_AS(pca_rotate(z, 0), InputError);
}

TEST_CASE("pca on diagonal covariance permutes axes")
{
  Rng rng(9);
  DataMatrix m(2000, 3);
  const double sd[3] = {1, 3, 2};
  for (std::size_t j = 0; j < 3; ++j)
  {
    for (std::size_t i = 0; i < m.rows; ++i)
    {
      m.at(i, j) = rng.normal(0, sd[j]);
    }
  }
  const auto r = pca_rotate(m, 3);
  std::vector<double> want{cov(m.column(1), m.column(1)), cov(m.column(2), m.column(2)),
                           cov(m.column(0), m.column(0))};
  for (std::size_t a = 0; a < 3; ++a)
  {
    CHECK(cov(r.column(a), r.column(a)) == doctest::Approx(want[a]).epsilon(0.02));
  }
}
