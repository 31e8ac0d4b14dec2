#include "dataset_io.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

#include "causalepp/error.hpp"

namespace causalepp::cli {

namespace {

constexpr const char* kSplitHeader = "user_id\titem_id\trating\ttimestamp\n";

template <typename T>
T parse_number(std::string_view field, const std::string& source, std::size_t line) {
  T v{};
  const auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || end != field.data() + field.size()) {
    throw ParseError(source, line, "bad numeric field '" + std::string(field) + "'");
  }
  return v;
}

std::vector<Interaction> read_split_file(const std::filesystem::path& path, int num_users, int num_items) {
  const std::string text = read_text_file(path);
  std::istringstream in(text);
  std::string row;
  std::vector<Interaction> xs;
  std::size_t line = 0;
  while (std::getline(in, row)) {
    ++line;
    if (line == 1 && row + "\n" == kSplitHeader) continue;
    if (row.empty()) continue;
    std::vector<std::string_view> f;
    std::string_view rest(row);
    while (true) {
      const auto tab = rest.find('\t');
      f.push_back(rest.substr(0, tab));
      if (tab == std::string_view::npos) break;
      rest.remove_prefix(tab + 1);
    }
    if (f.size() != 4) throw ParseError(path.string(), line, "expected 4 tab-separated fields");
    Interaction x;
    x.user = parse_number<UserId>(f[0], path.string(), line);
    x.item = parse_number<ItemId>(f[1], path.string(), line);
    if (!f[2].empty()) x.rating = parse_number<double>(f[2], path.string(), line);
    x.timestamp = parse_number<Timestamp>(f[3], path.string(), line);
    if (x.user < 0 || x.user >= num_users || x.item < 0 || x.item >= num_items) {
      throw ParseError(path.string(), line, "id outside the range declared in the manifest");
    }
    xs.push_back(x);
  }
  return xs;
}

std::string format_id_table(const std::vector<std::string>& ids) {
  std::string out = "id\toriginal\n";
  for (std::size_t k = 0; k < ids.size(); ++k) out += std::to_string(k) + "\t" + ids[k] + "\n";
  return out;
}

std::vector<std::string> read_id_table(const std::filesystem::path& path, std::size_t expected) {
  std::istringstream in(read_text_file(path));
  std::string row;
  std::vector<std::string> ids;
  std::getline(in, row);
  std::size_t line = 1;
  while (std::getline(in, row)) {
    ++line;
    const auto tab = row.find('\t');
    if (tab == std::string::npos) throw ParseError(path.string(), line, "expected id<TAB>original");
    if (parse_number<std::size_t>(std::string_view(row).substr(0, tab), path.string(), line) != ids.size()) {
      throw ParseError(path.string(), line, "ids must be listed densely from 0");
    }
    ids.push_back(row.substr(tab + 1));
  }
  if (ids.size() != expected) throw ParseError(path.string(), line, "id table size disagrees with the manifest");
  return ids;
}

const std::string& manifest_str(const KeyValues& m, const std::string& key, const std::filesystem::path& path) {
  const auto it = m.find(key);
  if (it == m.end()) throw ParseError(path.string(), 0, "manifest lacks '" + key + "'");
  return it->second;
}

int manifest_int(const KeyValues& m, const std::string& key, const std::filesystem::path& path) {
  return parse_number<int>(manifest_str(m, key, path), path.string(), 0);
}

}  // namespace

std::string format_interactions(const std::vector<Interaction>& xs) {
  std::string out = kSplitHeader;
  for (const auto& x : xs) {
    out += std::to_string(x.user) + "\t" + std::to_string(x.item) + "\t";
    if (x.rating) out += format_double(*x.rating);
    out += "\t" + std::to_string(x.timestamp) + "\n";
  }
  return out;
}

void write_prepared(const std::filesystem::path& dir, const PreparedData& data) {
  const auto& s = data.split;
  write_text_file(dir / "train.tsv", format_interactions(s.train));
  write_text_file(dir / "validation.tsv", format_interactions(s.validation));
  write_text_file(dir / "test.tsv", format_interactions(s.test));
  write_text_file(dir / "user_ids.tsv", format_id_table(data.user_ids));
  write_text_file(dir / "item_ids.tsv", format_id_table(data.item_ids));

  KeyValues m = data.manifest;
  m["grid_origin"] = std::to_string(s.grid.origin);
  m["grid_step_duration"] = format_double(s.grid.step_duration);
  m["grid_num_steps"] = std::to_string(s.grid.num_steps);
  m["grid_last_train_step"] = std::to_string(s.grid.last_train_step);
  m["num_users"] = std::to_string(s.num_users);
  m["num_items"] = std::to_string(s.num_items);
  m["num_train"] = std::to_string(s.train.size());
  m["num_validation"] = std::to_string(s.validation.size());
  m["num_test"] = std::to_string(s.test.size());
  m["user_id_table"] = "user_ids.tsv";
  m["item_id_table"] = "item_ids.tsv";
  write_key_values(dir / "manifest.txt", m, "causalepp prepared dataset");
}

PreparedData read_prepared(const std::filesystem::path& dir) {
  const auto manifest_path = dir / "manifest.txt";
  PreparedData d;
  d.manifest = read_key_values(manifest_path);
  auto& s = d.split;
  const auto& m = d.manifest;
  s.num_users = manifest_int(m, "num_users", manifest_path);
  s.num_items = manifest_int(m, "num_items", manifest_path);
  s.grid.origin = parse_number<Timestamp>(manifest_str(m, "grid_origin", manifest_path), manifest_path.string(), 0);
  s.grid.step_duration = parse_number<double>(manifest_str(m, "grid_step_duration", manifest_path), manifest_path.string(), 0);
  s.grid.num_steps = manifest_int(m, "grid_num_steps", manifest_path);
  s.grid.last_train_step = manifest_int(m, "grid_last_train_step", manifest_path);
  if (!(s.grid.step_duration > 0.0) || s.grid.num_steps < 1 || s.grid.last_train_step < 0 ||
      s.grid.last_train_step >= s.grid.num_steps) {
    throw ParseError(manifest_path.string(), 0, "inconsistent time grid");
  }
  s.train = read_split_file(dir / "train.tsv", s.num_users, s.num_items);
  s.validation = read_split_file(dir / "validation.tsv", s.num_users, s.num_items);
  s.test = read_split_file(dir / "test.tsv", s.num_users, s.num_items);
  if (s.train.empty()) throw EmptyDatasetError((dir / "train.tsv").string() + ": no training interactions");
  d.user_ids = read_id_table(dir / manifest_str(m, "user_id_table", manifest_path), static_cast<std::size_t>(s.num_users));
  d.item_ids = read_id_table(dir / manifest_str(m, "item_id_table", manifest_path), static_cast<std::size_t>(s.num_items));
  return d;
}

void write_ground_truth(const std::filesystem::path& dir, const SynthGroundTruth& truth) {
  std::string pref = "user_id,item_id,preference\n";
  for (UserId u = 0; u < truth.num_users; ++u) {
    for (ItemId i = 0; i < truth.num_items; ++i) {
      pref += std::to_string(u) + "," + std::to_string(i) + "," + format_double(truth.pref(u, i)) + "\n";
    }
  }
  write_text_file(dir / "truth_preference.csv", pref);

  std::string items = "item_id,true_quality,trending\n";
  for (ItemId i = 0; i < truth.num_items; ++i) {
    const bool trending =
        std::find(truth.trending_items.begin(), truth.trending_items.end(), i) != truth.trending_items.end();
    items += std::to_string(i) + "," + format_double(truth.item_quality_true[static_cast<std::size_t>(i)]) + "," +
             (trending ? "1" : "0") + "\n";
  }
  write_text_file(dir / "truth_items.csv", items);

  std::string conf = "user_id,step,conformity_weight\n";
  for (UserId u = 0; u < truth.num_users; ++u) {
    for (int t = 0; t < truth.num_steps; ++t) {
      conf += std::to_string(u) + "," + std::to_string(t) + "," + format_double(truth.conformity(u, t)) + "\n";
    }
  }
  write_text_file(dir / "truth_conformity.csv", conf);
}

}  // namespace causalepp::cli
