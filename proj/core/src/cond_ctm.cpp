#include "apml/cond_ctm.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "apml/io.hpp"
#include "apml/parallel.hpp"

namespace apml {

namespace {
constexpr const char* kMagic = "#apml-table-v1";
}

CondCtmTable::CondCtmTable(std::string domain, double missing_penalty,
                           std::map<std::string, std::string> meta)
    : domain_(std::move(domain)), missing_penalty_(missing_penalty), meta_(std::move(meta)) {}

void CondCtmTable::add_pair(const std::string& condition, const std::string& outcome,
                            uint64_t count) {
  entries_[condition][outcome] += count;
  total_ += count;
}

void CondCtmTable::merge(const CondCtmTable& other) {
  for (const auto& [cond, outs] : other.entries_)
    for (const auto& [out, c] : outs) add_pair(cond, out, c);
}

double CondCtmTable::value(const std::string& condition, const std::string& outcome) const {
  const uint64_t c = count(condition, outcome);
  if (c == 0) return missing_penalty_;
  return -std::log2(static_cast<double>(c) / static_cast<double>(total_));
}

uint64_t CondCtmTable::count(const std::string& condition, const std::string& outcome) const {
  auto it = entries_.find(condition);
  if (it == entries_.end()) return 0;
  auto jt = it->second.find(outcome);
  return jt == it->second.end() ? 0 : jt->second;
}

size_t CondCtmTable::pair_count() const {
  size_t n = 0;
  for (const auto& [cond, outs] : entries_) n += outs.size();
  return n;
}

double cond_ctm(const CondCtmTable& db, const std::string& outcome,
                const std::string& condition) {
  return db.value(condition, outcome);
}

CondCtmTable build_eca_cond_db() {
  const int width = 12, steps = 4, n_rules = 128;
  const uint64_t n_inits = uint64_t{1} << width;
  const uint64_t total_jobs = n_rules * n_inits;

  std::vector<CondCtmTable> parts(static_cast<size_t>(worker_count()),
                                  CondCtmTable("eca12", 20.0));
  parallel_chunks(total_jobs, [&](size_t begin, size_t end, size_t chunk) {
    auto& db = parts[chunk];
    for (uint64_t job = begin; job < end; ++job) {
      const int rule = static_cast<int>(job / n_inits);
      const uint64_t init = job % n_inits;
      const BinaryTensor row = uint_to_bits(init, width);
      const BinaryTensor evo = eca_evolve(EcaRule(rule), row, steps);
      const BinaryTensor outcome = evo.submatrix(1, 0, steps, width);
      db.add_pair(row.bit_string(), outcome.bit_string());
    }
  });
  CondCtmTable db("eca12", 20.0);
  for (const auto& part : parts) db.merge(part);
  return db;
}

std::string nk_topology_key(const std::vector<std::vector<int>>& inputs, int n) {
  BinaryTensor adj(n, n);
  for (int j = 0; j < n; ++j)
    for (int src : inputs[j]) adj.set(src, j, 1);
  return adj.bit_string();
}

std::string nk_rules_key(const std::vector<NkRule>& rules) {
  std::string key;
  key.reserve(rules.size() * 2);
  for (NkRule r : rules) {
    const auto code = static_cast<uint8_t>(r);
    key.push_back((code & 2) ? '1' : '0');
    key.push_back((code & 1) ? '1' : '0');
  }
  return key;
}

NkCondDbs build_nk_cond_dbs() {
  const int n = 4, steps = 10;
  // 6 unordered input pairs per node, 4 named rules per node.
  std::vector<std::pair<int, int>> pairs;
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) pairs.emplace_back(a, b);
  const uint64_t n_topologies = 6 * 6 * 6 * 6;      // 1296
  const uint64_t n_rule_lists = 4 * 4 * 4 * 4;      // 256
  const uint64_t total_jobs = n_topologies * n_rule_lists;  // 331,776

  const std::map<std::string, std::string> rule_meta{
      {"codes", "And=00,Or=01,Nand=10,XOr=11"}};
  const size_t workers = static_cast<size_t>(worker_count());
  std::vector<CondCtmTable> topo_parts(workers, CondCtmTable("nk-topology-4", 19.0));
  std::vector<CondCtmTable> rule_parts(workers, CondCtmTable("nk-rules-4", 19.0, rule_meta));

  parallel_chunks(total_jobs, [&](size_t begin, size_t end, size_t chunk) {
    auto& topo_db = topo_parts[chunk];
    auto& rules_db = rule_parts[chunk];
    for (uint64_t job = begin; job < end; ++job) {
      uint64_t t_idx = job / n_rule_lists;
      uint64_t r_idx = job % n_rule_lists;
      NkNetwork net;
      net.n = n;
      net.k = 2;
      std::vector<NkRule> rules(n);
      for (int node = 0; node < n; ++node) {
        const auto& p = pairs[t_idx % 6];
        t_idx /= 6;
        net.inputs.push_back({p.first, p.second});
        rules[node] = static_cast<NkRule>(r_idx % 4);
        r_idx /= 4;
        net.functions.push_back(nk_rule_truth_table(rules[node]));
      }
      const std::string vec = nk_evolve(net, std::vector<uint8_t>(n, 0), steps).bit_string();
      topo_db.add_pair(nk_topology_key(net.inputs, n), vec);
      rules_db.add_pair(nk_rules_key(rules), vec);
    }
  });

  NkCondDbs dbs{CondCtmTable("nk-topology-4", 19.0),
                CondCtmTable("nk-rules-4", 19.0, rule_meta)};
  for (const auto& p : topo_parts) dbs.topology.merge(p);
  for (const auto& p : rule_parts) dbs.rules.merge(p);
  return dbs;
}

void persist_cond_table(const CondCtmTable& db, const std::filesystem::path& path) {
  std::ostringstream out;
  out << kMagic << "\n";
  out << "#kind=conditional\n";
  out << "#domain=" << db.domain() << "\n";
  out << "#total=" << db.total() << "\n";
  out << "#penalty=" << format_fixed6(db.missing_penalty()) << "\n";
  for (const auto& [k, v] : db.meta()) out << "#" << k << "=" << v << "\n";
  out << "#config_hash=" << fnv1a_hex(db.domain() + "|" + std::to_string(db.total())) << "\n";
  std::vector<std::pair<const std::string*, const std::pair<const std::string, uint64_t>*>>
      rows;
  rows.reserve(db.pair_count());
  for (const auto& [cond, outs] : db.entries())
    for (const auto& kv : outs) rows.push_back({&cond, &kv});
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    if (*a.first != *b.first) return *a.first < *b.first;
    return a.second->first < b.second->first;
  });
  for (const auto& [cond, kv] : rows)
    out << *cond << "\t" << kv->first << "\t" << kv->second << "\n";
  atomic_write_file(path, out.str());
}

CondCtmTable load_cond_table(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line) || line != kMagic)
    throw std::runtime_error("not an apml table file (bad or missing version line): " +
                             path.string());
  std::map<std::string, std::string> header;
  std::vector<std::tuple<std::string, std::string, uint64_t>> body;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      auto eq = line.find('=');
      if (eq == std::string::npos) throw std::runtime_error("malformed header line: " + line);
      header[line.substr(1, eq - 1)] = line.substr(eq + 1);
      continue;
    }
    auto t1 = line.find('\t');
    auto t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
    if (t2 == std::string::npos)
      throw std::runtime_error("malformed conditional table line: " + line);
    uint64_t count = 0;
    auto res = std::from_chars(line.data() + t2 + 1, line.data() + line.size(), count);
    if (res.ec != std::errc{} || count < 1)
      throw std::runtime_error("bad pair count in line: " + line);
    body.emplace_back(line.substr(0, t1), line.substr(t1 + 1, t2 - t1 - 1), count);
  }
  if (header["kind"] != "conditional")
    throw std::runtime_error("expected #kind=conditional in " + path.string());
  for (const char* req : {"domain", "total", "penalty"})
    if (!header.count(req))
      throw std::runtime_error(std::string("missing required header #") + req);

  std::map<std::string, std::string> meta;
  for (const auto& [k, v] : header)
    if (k != "kind" && k != "domain" && k != "total" && k != "penalty" && k != "config_hash")
      meta[k] = v;
  CondCtmTable db(header["domain"], std::stod(header["penalty"]), meta);
  for (const auto& [cond, out, count] : body) db.add_pair(cond, out, count);

  uint64_t declared = 0;
  const std::string& t = header["total"];
  std::from_chars(t.data(), t.data() + t.size(), declared);
  if (declared != db.total())
    throw std::runtime_error("#total does not match sum of pair counts in " + path.string());
  if (db.missing_penalty() <= std::log2(static_cast<double>(db.total())))
    throw std::runtime_error("penalty does not exceed -log2(1/total)");
  return db;
}

}  // namespace apml
