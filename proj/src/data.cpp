#include "purets/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include <json.hpp>

#include "purets/io.hpp"

namespace purets {

const char* split_name(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
  }
  return "?";
}

Split parse_split(const std::string& name) {
  if (name == "train") return Split::Train;
  if (name == "val") return Split::Val;
  if (name == "test") return Split::Test;
  throw ConfigError("unknown split: " + name +
                    " (expected train, val or test)");
}

SplitPolicy SplitPolicy::fractions(int train, int val, int test) {
  if (train < 1 || val < 1 || test < 1)
    throw ConfigError("split parts must be >= 1");
  SplitPolicy p;
  p.kind = Kind::Fractions;
  p.train_part = train;
  p.val_part = val;
  p.test_part = test;
  return p;
}

SplitPolicy SplitPolicy::months(int train, int val, int test,
                                int rows_per_day) {
  SplitPolicy p = fractions(train, val, test);
  p.kind = Kind::Months;
  if (rows_per_day < 1) throw ConfigError("rows_per_day must be >= 1");
  p.rows_per_day = rows_per_day;
  return p;
}

SplitPolicy SplitPolicy::parse(const std::string& text, int rows_per_day) {
  std::string body = text;
  bool months = false;
  if (!body.empty() && (body.back() == 'm' || body.back() == 'M')) {
    months = true;
    body.pop_back();
  }
  int parts[3];
  std::size_t pos = 0;
  for (int i = 0; i < 3; ++i) {
    std::size_t next = body.find('/', pos);
    const std::string tok = body.substr(pos, next == std::string::npos
                                                 ? std::string::npos
                                                 : next - pos);
    auto res = std::from_chars(tok.data(), tok.data() + tok.size(), parts[i]);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
      throw ParseError("bad split policy '" + text + "'");
    if (i < 2) {
      if (next == std::string::npos)
        throw ParseError("bad split policy '" + text + "'");
      pos = next + 1;
    } else if (next != std::string::npos) {
      throw ParseError("bad split policy '" + text + "'");
    }
  }
  return months ? SplitPolicy::months(parts[0], parts[1], parts[2], rows_per_day)
                : SplitPolicy::fractions(parts[0], parts[1], parts[2]);
}

std::string SplitPolicy::str() const {
  std::string s = std::to_string(train_part) + "/" + std::to_string(val_part) +
                  "/" + std::to_string(test_part);
  if (kind == Kind::Months) s += "m";
  return s;
}

std::pair<Index, Index> SeriesDataset::split_range(Split s) const {
  switch (s) {
    case Split::Train: return {0, train_end};
    case Split::Val: return {train_end, val_end};
    case Split::Test: return {val_end, length()};
  }
  return {0, 0};
}

Matrix SeriesDataset::denormalize(const Matrix& z) const {
  if (z.cols() != n_features())
    throw ShapeError("denormalize: " + std::to_string(z.cols()) +
                     " columns vs " + std::to_string(n_features()) +
                     " channels");
  Matrix x = z;
  for (Index j = 0; j < x.cols(); ++j)
    x.col(j) = z.col(j) * channel_stds(j) + Vector::Constant(z.rows(), channel_means(j));
  return x;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t pos = 0;
  while (true) {
    const std::size_t comma = line.find(',', pos);
    if (comma == std::string::npos) {
      cells.push_back(line.substr(pos));
      break;
    }
    cells.push_back(line.substr(pos, comma - pos));
    pos = comma + 1;
  }
  return cells;
}

std::string trim(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t'))
    s.pop_back();
  std::size_t i = 0;
  while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
  return s.substr(i);
}

double parse_cell(const std::string& cell, Index file_line, std::size_t col) {
  const std::string t = trim(cell);
  double v = 0.0;
  auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size())
    throw ParseError("non-numeric cell at line " + std::to_string(file_line) +
                     ", column " + std::to_string(col + 1) + ": '" + cell + "'");
  if (!std::isfinite(v))
    throw ParseError("non-finite cell at line " + std::to_string(file_line) +
                     ", column " + std::to_string(col + 1) + ": '" + cell + "'");
  return v;
}

}  // namespace

SeriesDataset load_csv(const std::filesystem::path& path,
                       const CsvSchema& schema) {
  if (!std::filesystem::exists(path))
    throw IoError("missing file: " + path.string());
  const std::string text = read_file(path);

  std::vector<std::string> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string::npos) nl = text.size();
    std::string line = text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(std::move(line));
    pos = nl + 1;
  }
  if (lines.empty()) throw ParseError(path.string() + ": empty file");

  const std::vector<std::string> header = split_line(lines[0]);
  const std::size_t first_value_col = schema.has_date_column ? 1 : 0;
  if (header.size() <= first_value_col)
    throw ParseError(path.string() + ": header has no value columns");

  // Resolve which columns carry channels.
  std::vector<std::size_t> cols;
  std::vector<std::string> names;
  if (schema.value_columns.empty()) {
    for (std::size_t c = first_value_col; c < header.size(); ++c) {
      cols.push_back(c);
      names.push_back(trim(header[c]));
    }
  } else {
    for (const auto& want : schema.value_columns) {
      bool found = false;
      for (std::size_t c = first_value_col; c < header.size(); ++c) {
        if (trim(header[c]) == want) {
          cols.push_back(c);
          names.push_back(want);
          found = true;
          break;
        }
      }
      if (!found)
        throw ParseError(path.string() + ": column '" + want +
                         "' not in header");
    }
  }

  const Index rows = static_cast<Index>(lines.size()) - 1;
  if (rows == 0) throw ParseError(path.string() + ": no data rows");

  SeriesDataset ds;
  ds.name = path.stem().string();
  ds.channel_names = names;
  ds.values.resize(rows, static_cast<Index>(cols.size()));
  if (schema.has_date_column) ds.timestamps.reserve(rows);

  for (Index r = 0; r < rows; ++r) {
    const Index file_line = r + 2;  // 1-based, after the header
    const std::vector<std::string> cells = split_line(lines[r + 1]);
    if (cells.size() != header.size())
      throw ParseError(path.string() + ": line " + std::to_string(file_line) +
                       " has " + std::to_string(cells.size()) +
                       " cells, expected " + std::to_string(header.size()));
    if (schema.has_date_column) ds.timestamps.push_back(trim(cells[0]));
    for (std::size_t j = 0; j < cols.size(); ++j)
      ds.values(r, static_cast<Index>(j)) =
          parse_cell(cells[cols[j]], file_line, cols[j]);
  }
  return ds;
}

SeriesDataset split_and_normalize(SeriesDataset ds, const SplitPolicy& policy) {
  const Index total = ds.length();
  Index train_end = 0, val_end = 0, used = 0;
  if (policy.kind == SplitPolicy::Kind::Months) {
    const Index rows_per_month = 30 * static_cast<Index>(policy.rows_per_day);
    train_end = policy.train_part * rows_per_month;
    val_end = train_end + policy.val_part * rows_per_month;
    used = val_end + policy.test_part * rows_per_month;
    if (used > total)
      throw DataError("series has " + std::to_string(total) +
                      " rows, months policy " + policy.str() + " needs " +
                      std::to_string(used));
  } else {
    const Index sum =
        policy.train_part + policy.val_part + policy.test_part;
    train_end = total * policy.train_part / sum;
    val_end = total * (policy.train_part + policy.val_part) / sum;
    used = total;
  }
  if (train_end < 1 || val_end <= train_end || used <= val_end)
    throw DataError("split " + policy.str() + " leaves an empty split on " +
                    std::to_string(total) + " rows");

  if (used < total) {
    ds.values.conservativeResize(used, ds.n_features());
    if (!ds.timestamps.empty()) ds.timestamps.resize(used);
  }
  ds.train_end = train_end;
  ds.val_end = val_end;

  // Train-split statistics only; population std.
  const Index n = train_end;
  ds.channel_means.resize(ds.n_features());
  ds.channel_stds.resize(ds.n_features());
  for (Index j = 0; j < ds.n_features(); ++j) {
    const auto col = ds.values.col(j).head(n);
    const double mean = col.mean();
    const double var = (col.array() - mean).square().sum() / static_cast<double>(n);
    double std = std::sqrt(var);
    if (std == 0.0) {
      std = 1.0;
      ds.warnings.push_back("channel " + std::to_string(j) + " (" +
                            (j < static_cast<Index>(ds.channel_names.size())
                                 ? ds.channel_names[j]
                                 : "?") +
                            ") has zero variance in the train split; std set to 1");
    }
    ds.channel_means(j) = mean;
    ds.channel_stds(j) = std;
    ds.values.col(j) = (ds.values.col(j).array() - mean) / std;
  }
  ds.normalized = true;
  return ds;
}

SeriesDataset select_channel(const SeriesDataset& ds, Index j) {
  if (j < 0 || j >= ds.n_features())
    throw DataError("channel index " + std::to_string(j) +
                    " out of range [0, " + std::to_string(ds.n_features()) +
                    ")");
  SeriesDataset out;
  const std::string cname = j < static_cast<Index>(ds.channel_names.size())
                                ? ds.channel_names[static_cast<std::size_t>(j)]
                                : std::to_string(j);
  out.name = ds.name + ":" + cname;
  out.values = ds.values.col(j);
  out.timestamps = ds.timestamps;
  out.channel_names = {cname};
  if (ds.channel_means.size() > j) {
    out.channel_means = ds.channel_means.segment(j, 1);
    out.channel_stds = ds.channel_stds.segment(j, 1);
  }
  out.train_end = ds.train_end;
  out.val_end = ds.val_end;
  out.normalized = ds.normalized;
  return out;
}

WindowSet::WindowSet(const SeriesDataset& ds, Split split, Index input_window,
                     Index horizon, Index stride)
    : ds_(&ds), input_window_(input_window), horizon_(horizon),
      stride_(stride) {
  if (input_window < 1 || horizon < 1)
    throw ConfigError("window and horizon must be >= 1");
  if (stride < 1) throw ConfigError("stride must be >= 1");
  const auto [begin, end] = ds.split_range(split);
  begin_ = begin;
  const Index len = end - begin;
  if (len < input_window + horizon)
    throw DataError(std::string(split_name(split)) + " split has " +
                    std::to_string(len) + " rows, need at least " +
                    std::to_string(input_window + horizon) +
                    " for one window");
  count_ = (len - input_window - horizon) / stride + 1;
}

WindowBatch WindowSet::make_batch(std::span<const Index> windows) const {
  const Index B = static_cast<Index>(windows.size());
  WindowBatch wb{Tensor3(B, input_window_, ds_->n_features()),
                 Tensor3(B, horizon_, ds_->n_features())};
  for (Index i = 0; i < B; ++i) {
    const Index k = windows[static_cast<std::size_t>(i)];
    if (k < 0 || k >= count_)
      throw DataError("window index " + std::to_string(k) + " out of range [0, " +
                      std::to_string(count_) + ")");
    const Index s = start_row(k);
    wb.inputs.slice(i) = ds_->values.middleRows(s, input_window_);
    wb.targets.slice(i) = ds_->values.middleRows(s + input_window_, horizon_);
  }
  return wb;
}

WindowBatch WindowSet::all() const {
  std::vector<Index> idx(static_cast<std::size_t>(count_));
  for (Index k = 0; k < count_; ++k) idx[static_cast<std::size_t>(k)] = k;
  return make_batch(idx);
}

WindowSet make_windows(const SeriesDataset& ds, Split split,
                       Index input_window, Index horizon, Index stride) {
  return WindowSet(ds, split, input_window, horizon, stride);
}

SeriesDataset generate_sine(const SineSpec& spec) {
  if (spec.n_points < 1) throw ConfigError("sine: n_points must be >= 1");
  if (spec.step <= 0.0) throw ConfigError("sine: step must be > 0");
  if (spec.noise_std < 0.0) throw ConfigError("sine: noise_std must be >= 0");
  SeriesDataset ds;
  ds.name = "sine";
  ds.channel_names = {"sine"};
  ds.values.resize(spec.n_points, 1);
  RandomSource rng(spec.seed);
  for (Index i = 0; i < spec.n_points; ++i) {
    double v = spec.amplitude *
               std::sin(spec.phase + static_cast<double>(i) * spec.step);
    if (spec.noise_std > 0.0) v += spec.noise_std * rng.normal();
    ds.values(i, 0) = v;
  }
  return ds;
}

std::map<std::string, RegistryEntry> load_registry(
    const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("registry " + path.string() + ": " + e.what());
  }
  if (!j.is_object()) throw ParseError("registry must be a JSON object");

  std::map<std::string, RegistryEntry> out;
  for (const auto& [name, entry] : j.items()) {
    RegistryEntry r;
    if (!entry.contains("path"))
      throw ParseError("registry entry '" + name + "' missing path");
    std::filesystem::path p = entry.at("path").get<std::string>();
    if (p.is_relative()) p = path.parent_path() / p;
    r.path = p;
    r.schema.has_date_column = entry.value("has_date", true);
    if (entry.contains("value_columns"))
      r.schema.value_columns =
          entry.at("value_columns").get<std::vector<std::string>>();
    const int rows_per_day = entry.value("rows_per_day", 24);
    r.policy = SplitPolicy::parse(entry.value("split", std::string("7/1/2")),
                                  rows_per_day);
    out.emplace(name, std::move(r));
  }
  return out;
}

}  // namespace purets
