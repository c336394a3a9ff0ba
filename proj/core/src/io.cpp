#include "htsrec/io.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "htsrec/errors.hpp"

namespace htsrec {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(trim(field));
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

double parse_double(const std::string& s, const std::string& context) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw_validation(context + ": cannot parse number '" + s + "'");
  }
}

// Time index entries are either integers or ISO dates (YYYY-MM or
// YYYY-MM-DD); both map to a sortable integer. A leading '-' still means an
// integer (date separators sit past the year digits).
long long parse_time_key(const std::string& s, const std::string& context) {
  if (s.find('-', 1) == std::string::npos) {
    try {
      std::size_t pos = 0;
      const long long v = std::stoll(s, &pos);
      if (pos != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw_validation(context + ": cannot parse time index '" + s + "'");
    }
  }
  int year = 0, month = 0, day = 1;
  char dash1 = 0, dash2 = 0;
  std::stringstream ss(s);
  ss >> year >> dash1 >> month;
  if (ss.fail() || dash1 != '-' || month < 1 || month > 12)
    throw_validation(context + ": cannot parse time index '" + s + "'");
  if (ss.peek() == '-') {
    ss >> dash2 >> day;
    if (ss.fail() || day < 1 || day > 31)
      throw_validation(context + ": cannot parse time index '" + s + "'");
  }
  return static_cast<long long>(year) * 10000 + month * 100 + day;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw_validation("cannot open file '" + path + "'");
  CsvTable table;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto fields = split_csv_line(line);
    if (first) {
      table.header = std::move(fields);
      first = false;
    } else {
      table.rows.push_back(std::move(fields));
    }
  }
  if (first) throw_validation("file '" + path + "' is empty");
  return table;
}

// Maps each hierarchy label to its column in the CSV header (columns 1..).
std::vector<std::size_t> column_order(const CsvTable& table, const Hierarchy& h,
                                      const std::string& path) {
  std::map<std::string, std::size_t> positions;
  for (std::size_t c = 1; c < table.header.size(); ++c) {
    if (!positions.emplace(table.header[c], c).second)
      throw_validation(path + ": duplicate series column '" + table.header[c] + "'");
  }
  std::vector<std::size_t> order;
  for (const auto& label : h.labels()) {
    const auto it = positions.find(label);
    if (it == positions.end())
      throw_validation(path + ": missing series column '" + label + "'");
    order.push_back(it->second);
  }
  return order;
}

Eigen::MatrixXd read_labeled_matrix(const CsvTable& table, const Hierarchy& h,
                                    const std::string& path) {
  const auto order = column_order(table, h, path);
  const std::size_t t_obs = table.rows.size();
  if (t_obs == 0) throw_validation(path + ": no data rows");
  Eigen::MatrixXd values(t_obs, h.size());
  long long previous_key = 0;
  for (std::size_t t = 0; t < t_obs; ++t) {
    const auto& row = table.rows[t];
    if (row.size() != table.header.size())
      throw_validation(path + ": row " + std::to_string(t + 2) + " has " +
                       std::to_string(row.size()) + " fields, header has " +
                       std::to_string(table.header.size()));
    const long long key = parse_time_key(row[0], path);
    if (t > 0 && key <= previous_key)
      throw_validation(path + ": time index not strictly increasing at row " +
                       std::to_string(t + 2) + " ('" + row[0] + "')");
    previous_key = key;
    for (Eigen::Index j = 0; j < h.size(); ++j)
      values(t, j) = parse_double(row[order[j]], path);
  }
  return values;
}

}  // namespace

Hierarchy hierarchy_from_json(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const std::exception& e) {
    throw_validation(std::string("hierarchy JSON parse error: ") + e.what());
  }
  for (const char* key : {"labels_upper", "labels_bottom", "aggregation"}) {
    if (!j.contains(key))
      throw_validation(std::string("hierarchy JSON: missing field '") + key + "'");
  }
  Hierarchy h;
  h.labels_upper = j["labels_upper"].get<std::vector<std::string>>();
  h.labels_bottom = j["labels_bottom"].get<std::vector<std::string>>();
  const auto& agg = j["aggregation"];
  if (!agg.is_array() || agg.empty())
    throw_validation("hierarchy JSON: 'aggregation' must be a non-empty array");
  const std::size_t nu = agg.size();
  const std::size_t nb = agg[0].size();
  h.aggregation.resize(nu, nb);
  for (std::size_t i = 0; i < nu; ++i) {
    if (!agg[i].is_array() || agg[i].size() != nb)
      throw_validation("hierarchy JSON: aggregation row " + std::to_string(i) +
                       " has " + std::to_string(agg[i].size()) +
                       " entries, expected " + std::to_string(nb));
    for (std::size_t k = 0; k < nb; ++k) {
      if (!agg[i][k].is_number())
        throw_validation("hierarchy JSON: aggregation row " + std::to_string(i) +
                         " has a non-numeric entry");
      h.aggregation(i, k) = agg[i][k].get<double>();
    }
  }
  h.validate();
  return h;
}

std::string hierarchy_to_json(const Hierarchy& h) {
  ordered_json j;
  j["labels_upper"] = h.labels_upper;
  j["labels_bottom"] = h.labels_bottom;
  ordered_json rows = ordered_json::array();
  for (Eigen::Index i = 0; i < h.n_upper(); ++i) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index k = 0; k < h.n_bottom(); ++k)
      row.push_back(static_cast<int>(h.aggregation(i, k)));
    rows.push_back(row);
  }
  j["aggregation"] = rows;
  return j.dump(2);
}

Hierarchy load_hierarchy(const std::string& path) {
  return hierarchy_from_json(read_text_file(path));
}

TimeSeriesData read_series_csv(const std::string& path, const Hierarchy& h) {
  const CsvTable table = read_csv(path);
  TimeSeriesData data;
  data.series = h.labels();
  data.values = read_labeled_matrix(table, h, path);
  return data;
}

void write_series_csv(const std::string& path,
                      const std::vector<std::string>& labels,
                      const Eigen::MatrixXd& values) {
  if (static_cast<Eigen::Index>(labels.size()) != values.cols())
    throw_validation("write_series_csv: label/column count mismatch");
  std::ostringstream out;
  out << "time";
  for (const auto& label : labels) out << ',' << label;
  out << '\n';
  out.precision(17);
  for (Eigen::Index t = 0; t < values.rows(); ++t) {
    out << t;
    for (Eigen::Index j = 0; j < values.cols(); ++j) out << ',' << values(t, j);
    out << '\n';
  }
  write_text_file(path, out.str());
}

Dataset ingest_dataset(const std::string& hierarchy_path,
                       const std::string& series_path) {
  Dataset dataset;
  dataset.hierarchy = load_hierarchy(hierarchy_path);
  dataset.values = read_series_csv(series_path, dataset.hierarchy).values;
  return dataset;
}

ResidualMatrix read_residuals_csv(const std::string& path, const Hierarchy& h) {
  const CsvTable table = read_csv(path);
  ResidualMatrix residuals;
  residuals.values = read_labeled_matrix(table, h, path).transpose();
  residuals.validate();
  return residuals;
}

Eigen::VectorXd read_base_forecast_csv(const std::string& path,
                                       const Hierarchy& h) {
  const CsvTable table = read_csv(path);
  if (table.header.size() < 2 || table.header[0] != "series" ||
      table.header[1] != "mean")
    throw_validation(path + ": expected header 'series,mean'");
  std::map<std::string, double> values;
  for (const auto& row : table.rows) {
    if (row.size() < 2)
      throw_validation(path + ": malformed base-forecast row");
    if (!values.emplace(row[0], parse_double(row[1], path)).second)
      throw_validation(path + ": duplicate series '" + row[0] + "'");
  }
  Eigen::VectorXd y(h.size());
  Eigen::Index i = 0;
  for (const auto& label : h.labels()) {
    const auto it = values.find(label);
    if (it == values.end())
      throw_validation(path + ": missing base forecast for series '" + label + "'");
    y(i++) = it->second;
  }
  return y;
}

namespace {

ordered_json matrix_to_json(const Eigen::MatrixXd& m) {
  ordered_json rows = ordered_json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const ordered_json& j, const std::string& what) {
  if (!j.is_array() || j.empty())
    throw_validation("distribution JSON: '" + what + "' must be a non-empty array");
  const std::size_t rows = j.size();
  const std::size_t cols = j[0].size();
  Eigen::MatrixXd m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    if (j[i].size() != cols)
      throw_validation("distribution JSON: ragged matrix in '" + what + "'");
    for (std::size_t k = 0; k < cols; ++k) m(i, k) = j[i][k].get<double>();
  }
  return m;
}

}  // namespace

std::string distribution_to_json(const ForecastDistribution& d) {
  ordered_json j;
  if (const auto* g = std::get_if<MultivariateGaussian>(&d)) {
    j["kind"] = "gaussian";
    j["loc"] = std::vector<double>(g->mean.data(), g->mean.data() + g->mean.size());
    j["scale"] = matrix_to_json(g->cov);
  } else {
    const auto& t = std::get<MultivariateT>(d);
    j["kind"] = "mvt";
    j["loc"] = std::vector<double>(t.loc.data(), t.loc.data() + t.loc.size());
    j["scale"] = matrix_to_json(t.scale);
    j["df"] = t.df;
  }
  return j.dump(2);
}

ForecastDistribution distribution_from_json(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const std::exception& e) {
    throw_validation(std::string("distribution JSON parse error: ") + e.what());
  }
  const std::string kind = j.value("kind", "");
  const auto loc_vec = j.at("loc").get<std::vector<double>>();
  Eigen::VectorXd loc = Eigen::Map<const Eigen::VectorXd>(loc_vec.data(),
                                                          loc_vec.size());
  Eigen::MatrixXd scale = matrix_from_json(j.at("scale"), "scale");
  if (scale.rows() != loc.size() || scale.cols() != loc.size())
    throw_validation("distribution JSON: scale shape does not match loc");
  if (kind == "gaussian") return MultivariateGaussian{std::move(loc), std::move(scale)};
  if (kind == "mvt") {
    if (!j.contains("df"))
      throw_validation("distribution JSON: 'mvt' requires 'df'");
    return MultivariateT{std::move(loc), std::move(scale), j["df"].get<double>()};
  }
  throw_validation("distribution JSON: unknown kind '" + kind + "'");
}

namespace {

ordered_json method_report_to_json(const MethodReport& m,
                                   const std::vector<std::string>& series,
                                   bool is_base) {
  ordered_json j;
  if (!is_base) {
    j["rel_mse"] = m.rel_mse;
    j["rel_crps"] = m.rel_crps;
    j["rel_mis80"] = m.rel_mis80;
    j["rel_mis95"] = m.rel_mis95;
    j["rel_es"] = m.rel_es;
    j["rel_width80"] = m.rel_width80;
    j["rel_width95"] = m.rel_width95;
  }
  j["mse"] = m.mse_value;
  j["es_sum"] = m.es_sum;
  j["coverage80"] = m.coverage80;
  j["coverage95"] = m.coverage95;
  ordered_json per_series;
  for (std::size_t i = 0; i < series.size(); ++i) {
    ordered_json s;
    s["crps"] = m.crps_series[i];
    s["mis80"] = m.mis80_series[i];
    s["mis95"] = m.mis95_series[i];
    s["coverage80"] = m.coverage80_series[i];
    s["coverage95"] = m.coverage95_series[i];
    if (!is_base) {
      s["rel_width80"] = m.rel_width80_series[i];
      s["rel_width95"] = m.rel_width95_series[i];
    }
    per_series[series[i]] = s;
  }
  j["series"] = per_series;
  return j;
}

}  // namespace

std::string report_to_json(const ScoreReport& report,
                           const std::string& config_json) {
  ordered_json j;
  if (!config_json.empty()) {
    try {
      j["config"] = ordered_json::parse(config_json);
    } catch (const std::exception& e) {
      throw_validation(std::string("report config is not valid JSON: ") + e.what());
    }
  }
  j["origins"] = report.origin_count;
  j["base"] = method_report_to_json(report.base, report.series, true);
  ordered_json methods;
  for (const auto& [name, m] : report.methods)
    methods[name] = method_report_to_json(m, report.series, false);
  j["methods"] = methods;
  j["warnings"] = report.warnings;
  return j.dump(2);
}

std::string report_to_csv(const ScoreReport& report, int train_length) {
  std::ostringstream out;
  out.precision(17);
  out << "method,metric,train_length,value\n";
  for (const auto& [name, m] : report.methods) {
    const auto row = [&](const char* metric, double value) {
      out << name << ',' << metric << ',' << train_length << ',' << value << '\n';
    };
    row("rel_mse", m.rel_mse);
    row("rel_crps", m.rel_crps);
    row("rel_mis80", m.rel_mis80);
    row("rel_mis95", m.rel_mis95);
    row("rel_es", m.rel_es);
    row("rel_width80", m.rel_width80);
    row("rel_width95", m.rel_width95);
    row("coverage80", m.coverage80);
    row("coverage95", m.coverage95);
  }
  return out.str();
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_validation("cannot open file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw_validation("cannot write file '" + path + "'");
  out << content;
}

}  // namespace htsrec
