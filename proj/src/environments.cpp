#include "comblin/environments.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <string_view>

#include "comblin/errors.hpp"

namespace comblin {

namespace {

void fill_standard_normal(RowMatrix& m, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  double* data = m.data();
  for (Eigen::Index i = 0; i < m.size(); ++i) data[i] = normal(rng);
}

}  // namespace

EnvironmentTruth generate_coherent_gaussian(std::size_t m, std::size_t d, double lambda_true,
                                            double sigma_true, Rng& rng, FeatureScheme scheme) {
  if (m < 1) throw ParameterError("grid size m must be at least 1");
  if (d < 1) throw ParameterError("feature dimension d must be at least 1");
  if (!(lambda_true > 0.0)) throw ParameterError("lambda_true must be positive");
  if (!(sigma_true >= 0.0)) throw ParameterError("sigma_true must be nonnegative");

  const GridFamily grid{m};
  const auto L = static_cast<Eigen::Index>(grid.num_items());
  const auto D = static_cast<Eigen::Index>(d);
  RowMatrix phi;
  if (scheme == FeatureScheme::kIdentity) {
    if (D != L) {
      throw ParameterError("identity features need d = L = " + std::to_string(L) + ", got d=" +
                           std::to_string(d));
    }
    phi = RowMatrix::Identity(L, L);
  } else {
    phi.resize(L, D);
    fill_standard_normal(phi, rng);
    if (scheme == FeatureScheme::kNormalized) {
      for (Eigen::Index e = 0; e < L; ++e) {
        const double norm = phi.row(e).norm();
        if (norm > 0.0) phi.row(e) /= norm;
      }
    }
  }

  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd theta(D);
  for (Eigen::Index i = 0; i < D; ++i) theta[i] = lambda_true * normal(rng);

  GroundSetModel model(std::move(phi));
  Eigen::VectorXd mean = model.scores(theta);
  return EnvironmentTruth{std::move(model),
                          std::move(mean),
                          NoiseModel{NoiseKind::kGaussian, sigma_true},
                          grid,
                          std::move(theta),
                          lambda_true,
                          sigma_true};
}

EnvironmentTruth generate_bernoulli_tabular(const BernoulliSpec& spec, Rng& rng) {
  for (double mu : {spec.high_mean, spec.low_mean}) {
    if (!(mu >= 0.0 && mu <= 1.0)) {
      throw InputError("Bernoulli mean " + std::to_string(mu) + " outside [0, 1]");
    }
  }
  if (spec.dim < 4) throw ParameterError("tabular features need d >= 4 (at least one age bin)");
  if (spec.num_items < 2) throw ParameterError("tabular environment needs at least 2 items");
  if (spec.k < 1 || spec.k > spec.num_items) throw ParameterError("k must lie in [1, L]");
  if (spec.partition && (spec.k % 2 != 0 || spec.num_items % 2 != 0)) {
    throw ParameterError("gender quotas need even k and L");
  }

  const std::size_t L = spec.num_items;
  const std::size_t age_bins = spec.dim - 3;
  const auto col_male = static_cast<Eigen::Index>(age_bins);
  const Eigen::Index col_hours = col_male + 1;
  const Eigen::Index col_education = col_male + 2;

  std::vector<int> gender(L);
  for (std::size_t e = 0; e < L; ++e) gender[e] = e < L / 2 ? 0 : 1;
  std::shuffle(gender.begin(), gender.end(), rng);

  std::uniform_int_distribution<std::size_t> age(0, age_bins - 1);
  std::bernoulli_distribution long_hours(0.4);
  std::uniform_int_distribution<int> years(8, 16);

  RowMatrix phi = RowMatrix::Zero(static_cast<Eigen::Index>(L), static_cast<Eigen::Index>(spec.dim));
  Eigen::VectorXd mean(static_cast<Eigen::Index>(L));
  for (std::size_t i = 0; i < L; ++i) {
    const auto e = static_cast<Eigen::Index>(i);
    phi(e, static_cast<Eigen::Index>(age(rng))) = 1.0;
    phi(e, col_male) = gender[i];
    phi(e, col_hours) = long_hours(rng) ? 1.0 : 0.0;
    const int edu = years(rng);
    phi(e, col_education) = edu / 16.0;
    mean[e] = edu >= spec.education_threshold ? spec.high_mean : spec.low_mean;
  }

  FamilySpec family = TopKFamily{L, spec.k};
  if (spec.partition) family = PartitionFamily{PartitionSpec{gender, {spec.k / 2, spec.k / 2}}};
  return EnvironmentTruth{GroundSetModel(std::move(phi)),
                          std::move(mean),
                          NoiseModel{NoiseKind::kBernoulli, 0.0},
                          std::move(family),
                          std::nullopt,
                          0.0,
                          0.0};
}

namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

[[noreturn]] void fail_at(const std::filesystem::path& path, std::size_t line, const std::string& msg) {
  throw InputError(path.string() + ":" + std::to_string(line) + ": " + msg);
}

template <typename T>
T parse_field(std::string_view field, const std::filesystem::path& path, std::size_t line,
              const char* what) {
  field = trim(field);
  T value{};
  if (field.empty()) fail_at(path, line, std::string("empty ") + what);
  if constexpr (std::is_floating_point_v<T>) {
    // strtod accepts the full decimal/scientific syntax on every libstdc++.
    std::string copy(field);
    char* end = nullptr;
    value = std::strtod(copy.c_str(), &end);
    if (end != copy.c_str() + copy.size()) {
      fail_at(path, line, std::string("cannot parse ") + what + " '" + copy + "'");
    }
  } else {
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size()) {
      fail_at(path, line, std::string("cannot parse ") + what + " '" + std::string(field) + "'");
    }
  }
  return value;
}

}  // namespace

EnvironmentTruth load_tabular_environment(const std::filesystem::path& path,
                                          const TabularOptions& options) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open environment file " + path.string());

  std::string line;
  if (!std::getline(in, line)) fail_at(path, 1, "missing header");
  const auto header = split_commas(line);
  if (header.size() < 4 || trim(header[0]) != "item" || trim(header[1]) != "group" ||
      trim(header[2]) != "mean") {
    fail_at(path, 1, "header must be item,group,mean,f1,...,fd");
  }
  const std::size_t d = header.size() - 3;

  struct Row {
    long item;
    int group;
    double mean;
    std::vector<double> features;
  };
  std::vector<Row> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_commas(line);
    if (fields.size() != header.size()) {
      fail_at(path, line_no, "expected " + std::to_string(header.size()) + " columns, found " +
                                 std::to_string(fields.size()));
    }
    Row row;
    row.item = parse_field<long>(fields[0], path, line_no, "item");
    row.group = parse_field<int>(fields[1], path, line_no, "group");
    row.mean = parse_field<double>(fields[2], path, line_no, "mean");
    if (options.noise == NoiseKind::kBernoulli && !(row.mean >= 0.0 && row.mean <= 1.0)) {
      fail_at(path, line_no, "item " + std::to_string(row.item) + " has mean " +
                                 std::to_string(row.mean) + " outside [0, 1]");
    }
    row.features.reserve(d);
    for (std::size_t j = 0; j < d; ++j) {
      row.features.push_back(parse_field<double>(fields[3 + j], path, line_no, "feature"));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) fail_at(path, line_no, "no item rows");

  const std::size_t L = rows.size();
  RowMatrix phi(static_cast<Eigen::Index>(L), static_cast<Eigen::Index>(d));
  Eigen::VectorXd mean(static_cast<Eigen::Index>(L));
  std::vector<int> groups(L, -1);
  std::vector<char> seen(L, 0);
  for (std::size_t r = 0; r < L; ++r) {
    const Row& row = rows[r];
    if (row.item < 0 || static_cast<std::size_t>(row.item) >= L || seen[static_cast<std::size_t>(row.item)]) {
      throw InputError(path.string() + ": item ids must be 0.." + std::to_string(L - 1) +
                       " without repeats, bad id " + std::to_string(row.item));
    }
    const auto e = static_cast<std::size_t>(row.item);
    seen[e] = 1;
    groups[e] = row.group;
    mean[static_cast<Eigen::Index>(e)] = row.mean;
    for (std::size_t j = 0; j < d; ++j) {
      phi(static_cast<Eigen::Index>(e), static_cast<Eigen::Index>(j)) = row.features[j];
    }
  }

  FamilySpec family;
  if (options.quotas.empty()) {
    if (options.k < 1 || options.k > L) throw ParameterError("k must lie in [1, L]");
    family = TopKFamily{L, options.k};
  } else {
    for (int g : groups) {
      if (g >= static_cast<int>(options.quotas.size())) {
        throw InputError(path.string() + ": group " + std::to_string(g) + " has no quota");
      }
    }
    family = PartitionFamily{PartitionSpec{groups, options.quotas}};
  }
  return EnvironmentTruth{GroundSetModel(std::move(phi)),
                          std::move(mean),
                          NoiseModel{options.noise, options.sigma},
                          std::move(family),
                          std::nullopt,
                          0.0,
                          options.noise == NoiseKind::kGaussian ? options.sigma : 0.0};
}

void write_tabular_environment(const EnvironmentTruth& truth, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write environment file " + path.string());
  const std::size_t d = truth.dim();
  out << "item,group,mean";
  for (std::size_t j = 1; j <= d; ++j) out << ",f" << j;
  out << '\n';
  const auto* partition = std::get_if<PartitionFamily>(&truth.family);
  char buf[32];
  for (std::size_t e = 0; e < truth.num_items(); ++e) {
    const int group = partition ? partition->spec.groups[e] : -1;
    std::snprintf(buf, sizeof buf, "%.17g", truth.mean_weights[static_cast<Eigen::Index>(e)]);
    out << e << ',' << group << ',' << buf;
    for (std::size_t j = 0; j < d; ++j) {
      std::snprintf(buf, sizeof buf, "%.17g",
                    truth.model.features()(static_cast<Eigen::Index>(e), static_cast<Eigen::Index>(j)));
      out << ',' << buf;
    }
    out << '\n';
  }
  if (!out) throw InputError("failed writing " + path.string());
}

Eigen::VectorXd sample_weights(const EnvironmentTruth& truth, Rng& rng) {
  Eigen::VectorXd w = truth.mean_weights;
  if (truth.noise.kind == NoiseKind::kGaussian) {
    if (truth.noise.sigma > 0.0) {
      std::normal_distribution<double> normal(0.0, truth.noise.sigma);
      for (Eigen::Index e = 0; e < w.size(); ++e) w[e] += normal(rng);
    }
  } else {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (Eigen::Index e = 0; e < w.size(); ++e) {
      w[e] = unit(rng) < truth.mean_weights[e] ? 1.0 : 0.0;
    }
  }
  return w;
}

}  // namespace comblin
