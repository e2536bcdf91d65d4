#include "optlab/csv.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace optlab {

namespace {

constexpr const char* kHeader =
    "scheme,variable,value,seed,metric,iterations,coverage,episode,failed,error";

std::string escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

// Quote-aware table parse; a newline inside a quoted cell belongs to the
// cell, so rows are delimited only by unquoted newlines. Blank lines vanish.
std::vector<std::vector<std::string>> parse_table(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> cells;
  std::string cur;
  bool quoted = false;
  const auto end_row = [&] {
    if (cells.empty() && cur.empty()) return;
    cells.push_back(std::move(cur));
    cur.clear();
    rows.push_back(std::move(cells));
    cells.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(std::move(cur));
      cur.clear();
    } else if (c == '\n') {
      end_row();
    } else {
      cur += c;
    }
  }
  end_row();
  return rows;
}

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

std::string fmt_opt(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

std::optional<double> parse_opt(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return std::stod(s);
}

}  // namespace

std::string to_csv_string(const std::vector<ExperimentRecord>& records) {
  if (records.empty()) throw std::invalid_argument("to_csv_string: no records");
  std::ostringstream out;
  out << kHeader << '\n';
  for (const auto& r : records) {
    out << escape(r.scheme) << ',' << escape(r.variable) << ',' << fmt(r.value) << ','
        << r.seed << ',' << fmt(r.metric) << ',' << fmt_opt(r.iterations) << ','
        << fmt_opt(r.coverage) << ',' << fmt_opt(r.episode) << ','
        << (r.failed ? "1" : "0") << ',' << escape(r.error) << '\n';
  }
  return out.str();
}

std::vector<ExperimentRecord> from_csv_string(const std::string& text) {
  if (text.empty()) throw std::runtime_error("from_csv_string: empty input");
  const std::size_t nl = text.find('\n');
  const std::string header = text.substr(0, nl == std::string::npos ? text.size() : nl);
  if (header != kHeader)
    throw std::runtime_error("from_csv_string: unexpected header: " + header);
  std::vector<ExperimentRecord> records;
  const auto rows =
      nl == std::string::npos ? std::vector<std::vector<std::string>>{}
                              : parse_table(text.substr(nl + 1));
  for (const std::vector<std::string>& c : rows) {
    if (c.size() != 10)
      throw std::runtime_error("from_csv_string: expected 10 cells, got " +
                               std::to_string(c.size()));
    ExperimentRecord r;
    r.scheme = c[0];
    r.variable = c[1];
    r.value = std::stod(c[2]);
    r.seed = std::stoull(c[3]);
    r.metric = std::stod(c[4]);
    r.iterations = parse_opt(c[5]);
    r.coverage = parse_opt(c[6]);
    r.episode = parse_opt(c[7]);
    r.failed = c[8] == "1";
    r.error = c[9];
    records.push_back(std::move(r));
  }
  return records;
}

void emit_csv(const std::vector<ExperimentRecord>& records, const std::string& path) {
  const std::string text = to_csv_string(records);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("emit_csv: cannot open " + path);
  out << text;
  if (!out) throw std::runtime_error("emit_csv: write failed for " + path);
}

std::vector<ExperimentRecord> load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_csv: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_csv_string(buf.str());
}

void emit_plot_data(const std::vector<ExperimentRecord>& records, const std::string& path) {
  if (records.empty()) throw std::invalid_argument("emit_plot_data: no records");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("emit_plot_data: cannot open " + path);
  out << "scheme,variable,value,mean,stderr,count\n";
  out.precision(17);
  for (const Aggregate& a : aggregate(records)) {
    const auto it = std::find_if(records.begin(), records.end(), [&](const auto& r) {
      return r.scheme == a.scheme && r.value == a.value && !r.failed;
    });
    out << escape(a.scheme) << ',' << escape(it->variable) << ',' << a.value << ','
        << a.mean << ',' << a.stderr_ << ',' << a.count << '\n';
  }
  if (!out) throw std::runtime_error("emit_plot_data: write failed for " + path);
}

}  // namespace optlab
