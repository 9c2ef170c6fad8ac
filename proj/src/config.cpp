#include "hwr/config.hpp"

#include <sstream>
#include <type_traits>

#include "hwr/error.hpp"
#include "hwr/persist.hpp"
#include "hwr/textio.hpp"

namespace hwr {

const char* to_string(ClassifierKind kind) {
  switch (kind) {
    case ClassifierKind::nb: return "nb";
    case ClassifierKind::tan: return "tan";
    case ClassifierKind::fan: return "fan";
    case ClassifierKind::dbn: return "dbn";
  }
  return "fan";
}

ClassifierKind parse_classifier(const std::string& text) {
  if (text == "nb") return ClassifierKind::nb;
  if (text == "tan") return ClassifierKind::tan;
  if (text == "fan") return ClassifierKind::fan;
  if (text == "dbn") return ClassifierKind::dbn;
  throw Error(ErrorCode::parameter, "unknown classifier '" + text + "' (nb, tan, fan or dbn)");
}

std::vector<int> parse_int_range(const std::string& text) {
  try {
    const auto dots = text.find("..");
    if (dots == std::string::npos) return {std::stoi(text)};
    const int a = std::stoi(text.substr(0, dots)), b = std::stoi(text.substr(dots + 2));
    if (a > b) throw Error(ErrorCode::parameter, "empty range '" + text + "'");
    std::vector<int> out;
    for (int v = a; v <= b; ++v) out.push_back(v);
    return out;
  } catch (const std::logic_error&) {
    throw Error(ErrorCode::parameter, "bad integer range '" + text + "'");
  }
}

std::string format_int_range(const std::vector<int>& range) {
  if (range.empty()) return "";
  if (range.size() == 1) return std::to_string(range.front());
  return std::to_string(range.front()) + ".." + std::to_string(range.back());
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    T v{};
    if constexpr (std::is_floating_point_v<T>) {
      v = static_cast<T>(std::stod(value, &used));
    } else if constexpr (std::is_unsigned_v<T>) {
      if (!value.empty() && value[0] == '-') throw std::invalid_argument("negative");
      v = static_cast<T>(std::stoull(value, &used));
    } else {
      v = static_cast<T>(std::stoll(value, &used));
    }
    if (used != value.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::parameter, "bad value '" + value + "' for " + key);
  }
}

std::vector<ZernikeIndex> parse_zernike(const std::string& value) {
  std::vector<ZernikeIndex> out;
  std::istringstream in(value);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw Error(ErrorCode::parameter, "Zernike index '" + item + "' is not m:n");
    ZernikeIndex idx{parse_number<int>("zernike", item.substr(0, colon)),
                     parse_number<int>("zernike", item.substr(colon + 1))};
    validate_zernike_index(idx);
    out.push_back(idx);
  }
  if (out.size() != 5) throw Error(ErrorCode::parameter, "exactly 5 Zernike indices are required");
  return out;
}

}  // namespace

void Config::set(const std::string& key, const std::string& raw) {
  const std::string value = trim(raw);
  if (key == "seed") seed = parse_number<std::uint64_t>(key, value);
  else if (key == "classifier") classifier = parse_classifier(value);
  else if (key == "binarize") {
    if (value == "otsu") binarize = BinarizeMethod::otsu();
    else if (value.rfind("fixed:", 0) == 0) binarize = BinarizeMethod::fixed(parse_number<int>(key, value.substr(6)));
    else throw Error(ErrorCode::parameter, "binarize must be 'otsu' or 'fixed:<threshold>'");
  } else if (key == "zernike") zernike = parse_zernike(value);
  else if (key == "blocks") blocks = parse_number<int>(key, value);
  else if (key == "discretization") discretization = parse_discretization(value);
  else if (key == "codebook_k") codebook_k = parse_number<std::size_t>(key, value);
  else if (key == "codebook_k_range") {
    codebook_k_range.clear();
    if (!value.empty())
      for (int k : parse_int_range(value)) codebook_k_range.push_back(static_cast<std::size_t>(k));
  } else if (key == "pca_components") pca_components = parse_number<std::size_t>(key, value);
  else if (key == "kmeans_restarts") kmeans_restarts = parse_number<int>(key, value);
  else if (key == "kmeans_max_iters") kmeans_max_iters = parse_number<int>(key, value);
  else if (key == "tan_root") tan_root = parse_number<int>(key, value);
  else if (key == "fan_pruning") fan_pruning = parse_fan_pruning(value);
  else if (key == "window") window = parse_number<int>(key, value);
  else if (key == "dbn_codebook_k") dbn_codebook_k = parse_number<std::size_t>(key, value);
  else if (key == "q_range") q_range = parse_int_range(value);
  else if (key == "em_tol") em_tol = parse_number<double>(key, value);
  else if (key == "em_max_iters") em_max_iters = parse_number<int>(key, value);
  else if (key == "em_restarts") em_restarts = parse_number<int>(key, value);
  else if (key == "em_floor") em_floor = parse_number<double>(key, value);
  else if (key == "split_train") split_train = parse_number<double>(key, value);
  else if (key == "split_validation") split_validation = parse_number<double>(key, value);
  else if (key == "split_test") split_test = parse_number<double>(key, value);
  else throw Error(ErrorCode::parameter, "unknown configuration key '" + key + "'");
}

Config Config::parse(const std::string& text) {
  Config c;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::parameter, "line " + std::to_string(line_no) + ": expected key = value");
    c.set(trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  return c;
}

void Config::load_file(const std::filesystem::path& path) {
  const Config loaded = parse(read_text_file(path));
  *this = loaded;
}

std::string Config::to_text() const {
  using textio::format_double;
  std::ostringstream out;
  out << "seed = " << seed << '\n';
  out << "classifier = " << to_string(classifier) << '\n';
  out << "binarize = "
      << (binarize.kind == BinarizeMethod::Kind::otsu ? std::string("otsu")
                                                      : "fixed:" + std::to_string(binarize.threshold))
      << '\n';
  out << "zernike = ";
  for (std::size_t i = 0; i < zernike.size(); ++i) out << (i ? "," : "") << zernike[i].m << ':' << zernike[i].n;
  out << '\n';
  out << "blocks = " << blocks << '\n';
  out << "discretization = " << to_string(discretization) << '\n';
  out << "codebook_k = " << codebook_k << '\n';
  std::vector<int> kr(codebook_k_range.begin(), codebook_k_range.end());
  out << "codebook_k_range = " << format_int_range(kr) << '\n';
  out << "pca_components = " << pca_components << '\n';
  out << "kmeans_restarts = " << kmeans_restarts << '\n';
  out << "kmeans_max_iters = " << kmeans_max_iters << '\n';
  out << "tan_root = " << tan_root << '\n';
  out << "fan_pruning = " << to_string(fan_pruning) << '\n';
  out << "window = " << window << '\n';
  out << "dbn_codebook_k = " << dbn_codebook_k << '\n';
  out << "q_range = " << format_int_range(q_range) << '\n';
  out << "em_tol = " << format_double(em_tol) << '\n';
  out << "em_max_iters = " << em_max_iters << '\n';
  out << "em_restarts = " << em_restarts << '\n';
  out << "em_floor = " << format_double(em_floor) << '\n';
  out << "split_train = " << format_double(split_train) << '\n';
  out << "split_validation = " << format_double(split_validation) << '\n';
  out << "split_test = " << format_double(split_test) << '\n';
  return out.str();
}

}  // namespace hwr
