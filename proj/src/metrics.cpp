// SPDX-License-Identifier: Apache-2.0

#include "mecrl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace mecrl {

namespace {

std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

int tail_count(int episodes, double tail) {
  const int n = static_cast<int>(std::ceil(tail * episodes - 1e-9));
  return std::clamp(n, 1, std::max(episodes, 1));
}

Winner pick(double ddpg, double td3, bool higher_is_better) {
  if (ddpg == td3) return Winner::none;
  const bool td3_better = higher_is_better ? td3 > ddpg : td3 < ddpg;
  return td3_better ? Winner::td3 : Winner::ddpg;
}

}  // namespace

void write_metrics(std::ostream& out, std::span<const EpisodeRecord> records) {
  std::vector<EpisodeRecord> sorted(records.begin(), records.end());
  std::stable_sort(sorted.begin(), sorted.end(), [](const EpisodeRecord& a, const EpisodeRecord& b) {
    return a.episode != b.episode ? a.episode < b.episode : a.user < b.user;
  });
  out << kMetricsHeader << '\n';
  for (const auto& r : sorted) {
    out << r.episode << ',' << r.user << ',' << to_string(r.algo) << ',' << r.seed << ',' << fmt6(r.avg_reward)
        << ',' << fmt6(r.avg_power) << ',' << fmt6(r.avg_delay_kbit) << '\n';
  }
}

void write_metrics(const std::string& path, std::span<const EpisodeRecord> records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::system_error(errno, std::generic_category(), "cannot write metrics to '" + path + "'");
  write_metrics(out, records);
  out.flush();
  if (!out) throw std::system_error(errno, std::generic_category(), "write failed for '" + path + "'");
}

std::vector<EpisodeRecord> read_metrics(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::system_error(errno, std::generic_category(), "cannot read metrics from '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line != kMetricsHeader) {
    throw std::runtime_error("'" + path + "' does not start with the metrics header");
  }
  std::vector<EpisodeRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 7) throw std::runtime_error("malformed metrics row: " + line);
    EpisodeRecord r;
    r.episode = std::stoi(cells[0]);
    r.user = std::stoi(cells[1]);
    r.algo = parse_algo(cells[2]);
    r.seed = std::stoull(cells[3]);
    r.avg_reward = std::stod(cells[4]);
    r.avg_power = std::stod(cells[5]);
    r.avg_delay_kbit = std::stod(cells[6]);
    records.push_back(r);
  }
  return records;
}

TraceWriter::TraceWriter(const std::string& path) : out_(path, std::ios::trunc) {
  if (!out_) throw std::system_error(errno, std::generic_category(), "cannot write trace to '" + path + "'");
  out_ << "episode,step,user,p_l,p_o,reward,buffer_bits,d_l,d_o,arrival,gamma,phi\n";
}

void TraceWriter::write(const StepTrace& row) {
  const auto& m = row.metrics;
  out_ << row.episode << ',' << row.step << ',' << row.user << ',' << fmt6(row.action.p_l) << ','
             << fmt6(row.action.p_o) << ',' << fmt6(m.reward) << ',' << fmt6(m.buffer_bits) << ',' << fmt6(m.d_l)
             << ',' << fmt6(m.d_o) << ',' << fmt6(m.arrival) << ',' << fmt6(m.gamma) << ',' << fmt6(m.phi) << '\n';
}

std::vector<UserSummary> tail_means(std::span<const EpisodeRecord> records, double tail) {
  if (!(tail > 0.0 && tail <= 1.0)) throw std::invalid_argument("tail fraction must lie in (0, 1]");
  int last = 0;
  for (const auto& r : records) last = std::max(last, r.episode);
  const int first = last - tail_count(last, tail) + 1;

  std::map<int, std::pair<UserSummary, int>> acc;
  for (const auto& r : records) {
    if (r.episode < first) continue;
    auto& [s, n] = acc[r.user];
    s.user = r.user;
    s.reward += r.avg_reward;
    s.power += r.avg_power;
    s.delay += r.avg_delay_kbit;
    ++n;
  }
  std::vector<UserSummary> out;
  for (auto& [user, entry] : acc) {
    auto [s, n] = entry;
    s.reward /= n;
    s.power /= n;
    s.delay /= n;
    out.push_back(s);
  }
  return out;
}

std::vector<UserComparison> summarize(std::span<const EpisodeRecord> ddpg, std::span<const EpisodeRecord> td3,
                                      double tail) {
  auto shape = [](std::span<const EpisodeRecord> rs) {
    std::set<int> episodes;
    std::set<int> users;
    for (const auto& r : rs) {
      episodes.insert(r.episode);
      users.insert(r.user);
    }
    return std::make_pair(episodes, users);
  };
  if (shape(ddpg) != shape(td3)) {
    throw std::invalid_argument("summarize: runs cover different episodes or users");
  }
  const auto a = tail_means(ddpg, tail);
  const auto b = tail_means(td3, tail);
  std::vector<UserComparison> table;
  for (std::size_t i = 0; i < a.size(); ++i) {
    UserComparison row;
    row.user = a[i].user;
    row.ddpg = a[i];
    row.td3 = b[i];
    row.reward = pick(a[i].reward, b[i].reward, true);
    row.power = pick(a[i].power, b[i].power, false);
    row.delay = pick(a[i].delay, b[i].delay, false);
    table.push_back(row);
  }
  return table;
}

std::string format_comparison(const std::vector<UserComparison>& table) {
  auto cell = [](double v, bool win) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%9.2f%s", v, win ? "*" : " ");
    return std::string(buf);
  };
  std::ostringstream os;
  os << "        | Average reward (up)   | Average power (down)  | Average delay (down)\n";
  os << "        |      DDPG        TD3  |      DDPG        TD3  |      DDPG        TD3\n";
  for (const auto& row : table) {
    char head[16];
    std::snprintf(head, sizeof head, "User %-2d |", row.user);
    os << head << ' ' << cell(row.ddpg.reward, row.reward == Winner::ddpg) << ' '
       << cell(row.td3.reward, row.reward == Winner::td3) << " | " << cell(row.ddpg.power, row.power == Winner::ddpg)
       << ' ' << cell(row.td3.power, row.power == Winner::td3) << " | "
       << cell(row.ddpg.delay, row.delay == Winner::ddpg) << ' ' << cell(row.td3.delay, row.delay == Winner::td3)
       << '\n';
  }
  os << "(* marks the better algorithm per metric; delay is mean backlog in kbit)\n";
  return os.str();
}

}  // namespace mecrl
