#include "apml/ctm.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "apml/io.hpp"
#include "apml/parallel.hpp"

namespace apml {

namespace {

constexpr const char* kMagic = "#apml-table-v1";

double ceil6(double v) { return std::ceil(v * 1e6) / 1e6; }

struct Transition {
  uint8_t write;
  int8_t move;   // -1 left, +1 right
  uint8_t next;  // 0 = halt, 1..n
};

// Decodes machine `index` as states*symbols base-(4*(states+1)) digits.
// Digit layout: bit0 = write, bit1 = move, rest = next state.
void decode_machine(uint64_t index, int states, std::vector<Transition>& out) {
  const uint64_t base = 4ull * (states + 1);
  for (int i = 0; i < states * 2; ++i) {
    uint64_t digit = index % base;
    index /= base;
    out[i].write = static_cast<uint8_t>(digit & 1);
    out[i].move = (digit & 2) ? int8_t{1} : int8_t{-1};
    out[i].next = static_cast<uint8_t>(digit >> 2);
  }
}

// Runs one machine from a blank tape. Returns true if it halted within
// max_steps; `out` then holds the 01 string of the visited tape segment:
// every position the head occupied, including the one it halts on.
bool run_machine(const std::vector<Transition>& trans, int max_steps,
                 std::vector<uint8_t>& tape, std::string& out) {
  const int center = max_steps + 1;
  std::fill(tape.begin(), tape.end(), 0);
  int head = center;
  int lo = center, hi = center;
  int state = 1;
  for (int step = 0; step < max_steps; ++step) {
    const Transition& t = trans[(state - 1) * 2 + tape[head]];
    tape[head] = t.write;
    head += t.move;
    lo = std::min(lo, head);
    hi = std::max(hi, head);
    if (t.next == 0) {
      out.assign(hi - lo + 1, '0');
      for (int p = lo; p <= hi; ++p)
        if (tape[p]) out[p - lo] = '1';
      return true;
    }
    state = t.next;
  }
  return false;
}

}  // namespace

uint64_t TuringMachineSpec::machine_count() const {
  const uint64_t base = 4ull * (states + 1);
  uint64_t n = 1;
  for (int i = 0; i < states * symbols; ++i) {
    if (n > UINT64_MAX / base) return UINT64_MAX;
    n *= base;
  }
  return n;
}

CtmTable::CtmTable(std::string domain, std::unordered_map<std::string, double> entries,
                   uint64_t total_halting, std::string source, double missing_penalty)
    : domain_(std::move(domain)),
      entries_(std::move(entries)),
      total_halting_(total_halting),
      source_(std::move(source)),
      missing_penalty_(missing_penalty) {
  max_value_ = 0.0;
  for (const auto& [key, v] : entries_) {
    if (v < 0) throw std::invalid_argument("negative ctm value for block " + key);
    max_value_ = std::max(max_value_, v);
  }
  if (!entries_.empty() && missing_penalty_ < max_value_)
    throw std::invalid_argument("missing_penalty below max table value");
}

double CtmTable::value(const std::string& block_key) const {
  auto it = entries_.find(block_key);
  return it == entries_.end() ? missing_penalty_ : it->second;
}

std::pair<int, int> CtmTable::block_shape_2d() const {
  if (is_1d()) throw std::logic_error("1d table has no fixed block shape");
  // domain "2d:RxC"
  int r = 0, c = 0;
  auto colon = domain_.find(':');
  auto x = domain_.find('x', colon);
  if (colon == std::string::npos || x == std::string::npos)
    throw std::runtime_error("bad 2d domain descriptor: " + domain_);
  std::from_chars(domain_.data() + colon + 1, domain_.data() + x, r);
  std::from_chars(domain_.data() + x + 1, domain_.data() + domain_.size(), c);
  if (r < 1 || c < 1) throw std::runtime_error("bad 2d domain descriptor: " + domain_);
  return {r, c};
}

double CtmTable::mean_value(size_t length) const {
  double sum = 0.0;
  size_t n = 0;
  for (const auto& [key, v] : entries_) {
    if (length != 0 && key.size() != length) continue;
    sum += v;
    ++n;
  }
  if (n == 0) throw std::runtime_error("no entries of requested length");
  return sum / static_cast<double>(n);
}

double CtmTable::probability_mass() const {
  double mass = 0.0;
  for (const auto& [key, v] : entries_) mass += std::exp2(-v);
  return mass;
}

bool CtmTable::operator==(const CtmTable& o) const {
  return domain_ == o.domain_ && total_halting_ == o.total_halting_ &&
         source_ == o.source_ && missing_penalty_ == o.missing_penalty_ &&
         entries_ == o.entries_;
}

CtmTable enumerate_machines(const TuringMachineSpec& spec, const EnumerationLimits& limits) {
  if (spec.symbols != 2) throw std::invalid_argument("only 2-symbol machines supported");
  if (spec.states < 1) throw std::invalid_argument("states must be >= 1");
  if (spec.max_steps < 1) throw std::invalid_argument("max_steps must be >= 1");
  const uint64_t count = spec.machine_count();
  if (count > limits.max_machines)
    throw std::runtime_error("machine space too large to enumerate (" +
                             std::to_string(count) + " > cap " +
                             std::to_string(limits.max_machines) + ")");

  const size_t workers = static_cast<size_t>(worker_count());
  std::vector<std::unordered_map<std::string, uint64_t>> chunk_counts(
      std::max<size_t>(workers, 1));

  parallel_chunks(count, [&](size_t begin, size_t end, size_t chunk) {
    auto& counts = chunk_counts[chunk];
    std::vector<Transition> trans(spec.states * 2);
    std::vector<uint8_t> tape(2 * spec.max_steps + 3);
    std::string out;
    for (uint64_t m = begin; m < end; ++m) {
      decode_machine(m, spec.states, trans);
      if (run_machine(trans, spec.max_steps, tape, out)) ++counts[out];
    }
  });

  std::unordered_map<std::string, uint64_t> counts;
  uint64_t total = 0;
  for (auto& chunk : chunk_counts)
    for (auto& [s, c] : chunk) {
      counts[s] += c;
      total += c;
    }
  if (total == 0) throw std::runtime_error("no halting machine in the space");

  std::unordered_map<std::string, double> entries;
  entries.reserve(counts.size());
  double max_value = 0.0;
  for (auto& [s, c] : counts) {
    double v = ceil6(-std::log2(static_cast<double>(c) / static_cast<double>(total)));
    entries.emplace(s, v);
    max_value = std::max(max_value, v);
  }
  const double penalty = std::ceil(max_value) + 1.0;
  std::string source = "enumerated:states=" + std::to_string(spec.states) +
                       ",symbols=" + std::to_string(spec.symbols) +
                       ",max_steps=" + std::to_string(spec.max_steps);
  return CtmTable("1d", std::move(entries), total, std::move(source), penalty);
}

void persist_table(const CtmTable& table, const std::filesystem::path& path) {
  std::ostringstream out;
  out << kMagic << "\n";
  out << "#domain=" << table.domain() << "\n";
  out << "#source=" << table.source() << "\n";
  out << "#total=" << table.total_halting() << "\n";
  out << "#penalty=" << format_fixed6(table.missing_penalty()) << "\n";
  out << "#config_hash=" << fnv1a_hex(table.domain() + "|" + table.source()) << "\n";
  // Sorted body (length, then lex) keeps persisted output deterministic.
  std::vector<const std::pair<const std::string, double>*> rows;
  rows.reserve(table.entries().size());
  for (const auto& kv : table.entries()) rows.push_back(&kv);
  std::sort(rows.begin(), rows.end(), [](const auto* a, const auto* b) {
    if (a->first.size() != b->first.size()) return a->first.size() < b->first.size();
    return a->first < b->first;
  });
  for (const auto* kv : rows)
    out << kv->first << "\t" << format_fixed6(kv->second) << "\n";
  atomic_write_file(path, out.str());
}

CtmTable load_table(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line) || line != kMagic)
    throw std::runtime_error("not an apml table file (bad or missing version line): " +
                             path.string());
  std::map<std::string, std::string> header;
  std::unordered_map<std::string, double> entries;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      auto eq = line.find('=');
      if (eq == std::string::npos) throw std::runtime_error("malformed header line: " + line);
      header[line.substr(1, eq - 1)] = line.substr(eq + 1);
      continue;
    }
    auto tab = line.find('\t');
    if (tab == std::string::npos) throw std::runtime_error("malformed body line: " + line);
    std::string key = line.substr(0, tab);
    double v = 0;
    try {
      v = std::stod(line.substr(tab + 1));
    } catch (const std::exception&) {
      throw std::runtime_error("malformed value in line: " + line);
    }
    if (v < 0) throw std::runtime_error("negative ctm value for block " + key);
    if (!entries.emplace(std::move(key), v).second)
      throw std::runtime_error("duplicate block in table: " + line.substr(0, tab));
  }
  for (const char* req : {"domain", "total", "penalty"})
    if (!header.count(req))
      throw std::runtime_error(std::string("missing required header #") + req);
  uint64_t total = 0;
  {
    const std::string& t = header["total"];
    auto res = std::from_chars(t.data(), t.data() + t.size(), total);
    if (res.ec != std::errc{} || total < 1)
      throw std::runtime_error("bad #total header: " + t);
  }
  double penalty = std::stod(header["penalty"]);
  std::string source = header.count("source") ? header["source"] : "imported:unknown";
  CtmTable table(header["domain"], std::move(entries), total, source, penalty);
  if (source.rfind("enumerated", 0) == 0 && table.probability_mass() > 1.0 + 1e-9)
    throw std::runtime_error("probability mass exceeds 1 for enumerated table");
  return table;
}

double ctm(const CtmTable& table, const BinaryTensor& block) {
  if (table.is_1d()) {
    if (!block.is_vector())
      throw std::invalid_argument("2d block queried against a 1d table");
  } else {
    auto [r, c] = table.block_shape_2d();
    if (block.rows() != r || block.cols() != c)
      throw std::invalid_argument("block shape does not match table domain");
  }
  return table.value(block.bit_string());
}

}  // namespace apml
