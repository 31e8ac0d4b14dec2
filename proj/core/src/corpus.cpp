#include "causalepp/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string_view>
#include <unordered_map>

#include "causalepp/error.hpp"

namespace causalepp {

namespace {

std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  const char delim = line.find('\t') != std::string_view::npos ? '\t' : ',';
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(delim, start);
    fields.push_back(trim(line.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return fields;
}

bool parse_int64(std::string_view s, std::int64_t& out) {
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

bool parse_double(std::string_view s, double& out) {
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

// Interns raw string ids into a growing table.
class IdTable {
 public:
  std::int32_t intern(std::string_view raw) {
    auto [it, inserted] = index_.try_emplace(std::string(raw), static_cast<std::int32_t>(names_.size()));
    if (inserted) names_.emplace_back(raw);
    return it->second;
  }
  const std::string& name(std::int32_t id) const { return names_[static_cast<std::size_t>(id)]; }

 private:
  std::unordered_map<std::string, std::int32_t> index_;
  std::vector<std::string> names_;
};

}  // namespace

TimeGrid TimeGrid::over_range(Timestamp first, Timestamp last, int num_steps) {
  if (num_steps < 1) throw InvalidArgument("time grid needs at least one step");
  if (last < first) throw InvalidArgument("time grid range is reversed");
  TimeGrid grid;
  grid.origin = first;
  grid.num_steps = num_steps;
  const double span = static_cast<double>(last - first);
  grid.step_duration = span > 0.0 ? span / num_steps : 1.0;
  grid.last_train_step = grid.step_of(last);
  return grid;
}

int TimeGrid::step_of(Timestamp ts) const {
  const double raw = std::floor(static_cast<double>(ts - origin) / step_duration);
  if (raw < 0.0) return 0;
  if (raw >= static_cast<double>(num_steps - 1)) return num_steps - 1;
  return static_cast<int>(raw);
}

int TimeGrid::lookup_step(Timestamp ts) const {
  return std::min(step_of(ts), last_train_step);
}

std::vector<Interaction> k_core_filter(std::vector<Interaction> interactions, int k) {
  if (k <= 1) return interactions;
  std::unordered_map<UserId, int> user_degree;
  std::unordered_map<ItemId, int> item_degree;
  while (true) {
    user_degree.clear();
    item_degree.clear();
    for (const auto& x : interactions) {
      ++user_degree[x.user];
      ++item_degree[x.item];
    }
    const auto weak = [&](const Interaction& x) {
      return user_degree[x.user] < k || item_degree[x.item] < k;
    };
    const auto before = interactions.size();
    std::erase_if(interactions, weak);
    if (interactions.size() == before) return interactions;
  }
}

Corpus parse_interactions(const std::string& text, int k_core, const std::string& source) {
  if (k_core < 0) throw InvalidArgument("k_core must be non-negative");
  IdTable users;
  IdTable items;
  std::vector<Interaction> rows;

  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  bool first_content = true;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = trim(line);
    if (view.empty() || view.front() == '#') continue;
    const auto fields = split_fields(view);
    std::int64_t ts = 0;
    if (first_content) {
      first_content = false;
      // A first row whose timestamp column is not an integer is a header.
      if (fields.size() == 4 && !parse_int64(fields[3], ts)) continue;
    }
    if (fields.size() != 4) {
      throw ParseError(source, line_no,
                       "expected 4 columns (user_id, item_id, rating, timestamp), got " +
                           std::to_string(fields.size()));
    }
    if (fields[0].empty() || fields[1].empty()) throw ParseError(source, line_no, "empty id");
    if (!parse_int64(fields[3], ts)) {
      throw ParseError(source, line_no, "timestamp is not an integer: '" + std::string(fields[3]) + "'");
    }
    Interaction x;
    x.user = users.intern(fields[0]);
    x.item = items.intern(fields[1]);
    x.timestamp = ts;
    if (!fields[2].empty()) {
      double rating = 0.0;
      if (!parse_double(fields[2], rating)) {
        throw ParseError(source, line_no, "rating is not a number: '" + std::string(fields[2]) + "'");
      }
      x.rating = rating;
    }
    rows.push_back(x);
  }

  std::stable_sort(rows.begin(), rows.end(),
                   [](const Interaction& a, const Interaction& b) { return a.timestamp < b.timestamp; });
  rows = k_core_filter(std::move(rows), k_core);
  if (rows.empty()) throw EmptyDatasetError(source + ": no interactions left after " +
                                            std::to_string(k_core) + "-core filtering");

  Corpus corpus;
  std::unordered_map<std::int32_t, std::int32_t> user_map;
  std::unordered_map<std::int32_t, std::int32_t> item_map;
  corpus.interactions.reserve(rows.size());
  for (auto x : rows) {
    auto [uit, new_user] = user_map.try_emplace(x.user, corpus.num_users());
    if (new_user) corpus.user_ids.push_back(users.name(x.user));
    auto [iit, new_item] = item_map.try_emplace(x.item, corpus.num_items());
    if (new_item) corpus.item_ids.push_back(items.name(x.item));
    x.user = uit->second;
    x.item = iit->second;
    corpus.interactions.push_back(x);
  }
  return corpus;
}

Corpus load_interactions(const std::filesystem::path& path, int k_core) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open interaction file: " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_interactions(buffer.str(), k_core, path.string());
}

SplitDataset chronological_split(std::span<const Interaction> interactions, int num_parts,
                                 int num_steps, int num_users, int num_items) {
  if (num_parts < 2) throw InvalidArgument("num_parts must be at least 2");
  const std::size_t n = interactions.size();
  if (n < static_cast<std::size_t>(num_parts)) {
    throw InvalidArgument("cannot split " + std::to_string(n) + " interactions into " +
                          std::to_string(num_parts) + " parts");
  }
  if (!std::is_sorted(interactions.begin(), interactions.end(),
                      [](const Interaction& a, const Interaction& b) { return a.timestamp < b.timestamp; })) {
    throw InvalidArgument("interactions must be sorted by timestamp before splitting");
  }
  for (const auto& x : interactions) {
    if (x.user < 0 || x.user >= num_users || x.item < 0 || x.item >= num_items) {
      throw InvalidArgument("interaction id outside the declared user/item range");
    }
  }

  const std::size_t parts = static_cast<std::size_t>(num_parts);
  const std::size_t n_train = n * (parts - 1) / parts;
  const std::size_t rest = n - n_train;
  const std::size_t n_valid = (rest + 1) / 2;

  SplitDataset split;
  split.train.assign(interactions.begin(), interactions.begin() + static_cast<std::ptrdiff_t>(n_train));
  split.validation.assign(interactions.begin() + static_cast<std::ptrdiff_t>(n_train),
                          interactions.begin() + static_cast<std::ptrdiff_t>(n_train + n_valid));
  split.test.assign(interactions.begin() + static_cast<std::ptrdiff_t>(n_train + n_valid), interactions.end());
  split.grid = TimeGrid::over_range(split.train.front().timestamp, split.train.back().timestamp, num_steps);
  split.num_users = num_users;
  split.num_items = num_items;
  return split;
}

SplitDataset chronological_split(std::span<const Interaction> interactions, int num_parts, int num_steps) {
  int num_users = 0;
  int num_items = 0;
  for (const auto& x : interactions) {
    num_users = std::max(num_users, x.user + 1);
    num_items = std::max(num_items, x.item + 1);
  }
  return chronological_split(interactions, num_parts, num_steps, num_users, num_items);
}

}  // namespace causalepp
