#include "fastpacket/store.hpp"

#include <bit>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fastpacket/error.hpp"

namespace fastpacket {

namespace {

void put_u32(std::string& buf, std::uint32_t v) {
  for (int shift = 0; shift < 32; shift += 8) {
    buf.push_back(static_cast<char>((v >> shift) & 0xFF));
  }
}

void put_u64(std::string& buf, std::uint64_t v) {
  for (int shift = 0; shift < 64; shift += 8) {
    buf.push_back(static_cast<char>((v >> shift) & 0xFF));
  }
}

void put_f32(std::string& buf, float v) {
  put_u32(buf, std::bit_cast<std::uint32_t>(v));
}

void put_f64(std::string& buf, double v) {
  put_u64(buf, std::bit_cast<std::uint64_t>(v));
}

struct Cursor {
  std::string_view data;
  std::size_t pos = 0;

  std::size_t remaining() const { return data.size() - pos; }

  void need(std::size_t n, const char* what) {
    if (remaining() < n) {
      raise(Errc::corrupt_section, std::string("short read in ") + what);
    }
  }

  std::string_view bytes(std::size_t n, const char* what) {
    need(n, what);
    const auto view = data.substr(pos, n);
    pos += n;
    return view;
  }

  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int shift = 0; shift < 32; shift += 8) {
      v |= static_cast<std::uint32_t>(
               static_cast<unsigned char>(data[pos++]))
           << shift;
    }
    return v;
  }

  std::uint64_t u64(const char* what) {
    need(8, what);
    std::uint64_t v = 0;
    for (int shift = 0; shift < 64; shift += 8) {
      v |= static_cast<std::uint64_t>(
               static_cast<unsigned char>(data[pos++]))
           << shift;
    }
    return v;
  }

  float f32(const char* what) { return std::bit_cast<float>(u32(what)); }
  double f64(const char* what) { return std::bit_cast<double>(u64(what)); }

  void expect_done(const char* what) {
    if (remaining() != 0) {
      raise(Errc::corrupt_section,
            std::string("trailing bytes in ") + what);
    }
  }
};

void write_section(std::ostream& out, const char (&tag)[5],
                   const std::string& payload) {
  out.write(tag, 4);
  std::string len;
  put_u64(len, payload.size());
  out.write(len.data(), static_cast<std::streamsize>(len.size()));
  out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
}

std::string matrix_payload(const MatrixX<float>& m) {
  std::string buf;
  buf.reserve(16 + static_cast<std::size_t>(m.size()) * 4);
  put_u64(buf, static_cast<std::uint64_t>(m.rows()));
  put_u64(buf, static_cast<std::uint64_t>(m.cols()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      put_f32(buf, m(r, c));
    }
  }
  return buf;
}

MatrixX<float> parse_matrix(std::string_view payload, const char* what) {
  Cursor cur{payload};
  const std::uint64_t rows = cur.u64(what);
  const std::uint64_t cols = cur.u64(what);
  const auto expected = static_cast<unsigned __int128>(rows) * cols * 4;
  if (expected != cur.remaining()) {
    raise(Errc::corrupt_section,
          std::string("matrix size mismatch in ") + what);
  }
  MatrixX<float> m(static_cast<Eigen::Index>(rows),
                   static_cast<Eigen::Index>(cols));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      m(r, c) = cur.f32(what);
    }
  }
  return m;
}

std::string config_payload(const EmbeddingModel& model) {
  std::string buf;
  buf.push_back(model.config.mode == ModelMode::supervised ? '\0' : '\1');
  put_u32(buf, static_cast<std::uint32_t>(model.config.dim));
  put_f64(buf, model.config.lr0);
  put_u32(buf, static_cast<std::uint32_t>(model.config.epochs));
  put_u32(buf, static_cast<std::uint32_t>(model.config.negatives));
  put_u32(buf, static_cast<std::uint32_t>(model.config.window));
  put_u64(buf, model.config.seed);
  put_u32(buf, static_cast<std::uint32_t>(model.config.threads));
  put_u32(buf, model.tokenizer.word_bytes);
  put_u32(buf, model.tokenizer.minn);
  put_u32(buf, model.tokenizer.maxn);
  put_u64(buf, model.tokenizer.buckets);
  put_u64(buf, model.tokenizer.min_count);
  put_u64(buf, static_cast<std::uint64_t>(model.tokenizer.max_packet_bytes));
  return buf;
}

void parse_config(std::string_view payload, EmbeddingModel& model) {
  Cursor cur{payload};
  const auto mode = static_cast<unsigned char>(
      cur.bytes(1, "CFG0")[0]);
  if (mode > 1) raise(Errc::corrupt_section, "unknown model mode");
  model.config.mode = mode == 0 ? ModelMode::supervised : ModelMode::skipgram;
  model.config.dim = static_cast<int>(cur.u32("CFG0"));
  model.config.lr0 = cur.f64("CFG0");
  model.config.epochs = static_cast<int>(cur.u32("CFG0"));
  model.config.negatives = static_cast<int>(cur.u32("CFG0"));
  model.config.window = static_cast<int>(cur.u32("CFG0"));
  model.config.seed = cur.u64("CFG0");
  model.config.threads = static_cast<int>(cur.u32("CFG0"));
  model.tokenizer.word_bytes = cur.u32("CFG0");
  model.tokenizer.minn = cur.u32("CFG0");
  model.tokenizer.maxn = cur.u32("CFG0");
  model.tokenizer.buckets = cur.u64("CFG0");
  model.tokenizer.min_count = cur.u64("CFG0");
  model.tokenizer.max_packet_bytes =
      static_cast<std::size_t>(cur.u64("CFG0"));
  cur.expect_done("CFG0");
  model.config.validate();
  model.tokenizer.validate();
}

std::string vocab_payload(const Vocabulary& vocab) {
  std::string buf;
  put_u64(buf, vocab.size());
  put_u64(buf, vocab.bucket_count());
  for (std::size_t w = 0; w < vocab.size(); ++w) {
    const std::string& word = vocab.word(w);
    put_u32(buf, static_cast<std::uint32_t>(word.size()));
    buf.append(word);
    put_u64(buf, vocab.count(w));
  }
  return buf;
}

Vocabulary parse_vocab(std::string_view payload) {
  Cursor cur{payload};
  const std::uint64_t v = cur.u64("VOCB");
  const std::uint64_t buckets = cur.u64("VOCB");
  std::vector<std::pair<std::string, std::uint64_t>> rows;
  rows.reserve(static_cast<std::size_t>(v));
  for (std::uint64_t i = 0; i < v; ++i) {
    const std::uint32_t len = cur.u32("VOCB");
    std::string word(cur.bytes(len, "VOCB"));
    const std::uint64_t count = cur.u64("VOCB");
    rows.emplace_back(std::move(word), count);
  }
  cur.expect_done("VOCB");
  return Vocabulary::from_rows(std::move(rows), buckets);
}

std::string labels_payload(const std::vector<std::string>& labels) {
  std::string buf;
  put_u64(buf, labels.size());
  for (const auto& label : labels) {
    put_u32(buf, static_cast<std::uint32_t>(label.size()));
    buf.append(label);
  }
  return buf;
}

std::vector<std::string> parse_labels(std::string_view payload) {
  Cursor cur{payload};
  const std::uint64_t k = cur.u64("LBLS");
  std::vector<std::string> labels;
  labels.reserve(static_cast<std::size_t>(k));
  for (std::uint64_t i = 0; i < k; ++i) {
    const std::uint32_t len = cur.u32("LBLS");
    labels.emplace_back(cur.bytes(len, "LBLS"));
  }
  cur.expect_done("LBLS");
  return labels;
}

std::string svm_payload(const SvmAttachment& attachment) {
  std::string buf;
  put_u32(buf, static_cast<std::uint32_t>(attachment.positive_label.size()));
  buf.append(attachment.positive_label);
  put_u64(buf, static_cast<std::uint64_t>(attachment.svm.w.size()));
  for (Eigen::Index i = 0; i < attachment.svm.w.size(); ++i) {
    put_f64(buf, attachment.svm.w[i]);
  }
  put_f64(buf, attachment.svm.bias);
  put_f64(buf, attachment.svm.lambda);
  return buf;
}

SvmAttachment parse_svm(std::string_view payload) {
  Cursor cur{payload};
  SvmAttachment attachment;
  const std::uint32_t len = cur.u32("SVMS");
  attachment.positive_label = std::string(cur.bytes(len, "SVMS"));
  const std::uint64_t dim = cur.u64("SVMS");
  attachment.svm.w.resize(static_cast<Eigen::Index>(dim));
  for (std::uint64_t i = 0; i < dim; ++i) {
    attachment.svm.w[static_cast<Eigen::Index>(i)] = cur.f64("SVMS");
  }
  attachment.svm.bias = cur.f64("SVMS");
  attachment.svm.lambda = cur.f64("SVMS");
  cur.expect_done("SVMS");
  return attachment;
}

void check_model(const EmbeddingModel& model) {
  if (model.input.rows() !=
      static_cast<Eigen::Index>(model.vocab.row_count())) {
    raise(Errc::corrupt_section, "input rows do not match vocabulary");
  }
  if (model.input.cols() != model.config.dim) {
    raise(Errc::corrupt_section, "input cols do not match dim");
  }
  const auto expected_out =
      model.supervised() ? static_cast<Eigen::Index>(model.labels.size())
                         : static_cast<Eigen::Index>(model.vocab.size());
  if (model.output.rows() != expected_out) {
    raise(Errc::corrupt_section, "output rows do not match model shape");
  }
  if (model.output.cols() != model.config.dim) {
    raise(Errc::corrupt_section, "output cols do not match dim");
  }
  if (model.supervised() && model.labels.empty()) {
    raise(Errc::corrupt_section, "supervised model without labels");
  }
  if (!model.input.allFinite() || !model.output.allFinite()) {
    raise(Errc::non_finite, "model contains non-finite values");
  }
}

std::string format_coeff(float v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", static_cast<double>(v));
  return buf;
}

}  // namespace

void save_model(const ModelBundle& bundle, std::ostream& out) {
  check_model(bundle.model);
  if (bundle.svm.has_value() && !bundle.svm->svm.w.allFinite()) {
    raise(Errc::non_finite, "svm contains non-finite values");
  }

  out.write(kStoreMagic, 4);
  std::string version;
  put_u32(version, kStoreVersion);
  out.write(version.data(), static_cast<std::streamsize>(version.size()));

  write_section(out, "CFG0", config_payload(bundle.model));
  write_section(out, "VOCB", vocab_payload(bundle.model.vocab));
  write_section(out, "IMAT", matrix_payload(bundle.model.input));
  write_section(out, "OMAT", matrix_payload(bundle.model.output));
  write_section(out, "LBLS", labels_payload(bundle.model.labels));
  if (bundle.svm.has_value()) {
    write_section(out, "SVMS", svm_payload(*bundle.svm));
  }
  if (!out) raise(Errc::io_failure, "failed to write model");
}

void save_model_file(const ModelBundle& bundle,
                     const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(Errc::io_failure, "cannot open " + path.string());
  save_model(bundle, out);
}

ModelBundle load_model(std::istream& in) {
  std::ostringstream sink;
  sink << in.rdbuf();
  const std::string data = sink.str();

  Cursor cur{data};
  const auto magic = cur.bytes(4, "header");
  if (magic != std::string_view(kStoreMagic, 4)) {
    raise(Errc::bad_magic, "not a model file");
  }
  const std::uint32_t version = cur.u32("header");
  if (version != kStoreVersion) {
    raise(Errc::unsupported_version,
          "unsupported model version " + std::to_string(version));
  }

  std::string_view cfg0;
  std::string_view vocb;
  std::string_view imat;
  std::string_view omat;
  std::string_view lbls;
  std::string_view svms;
  bool has_cfg0 = false;
  bool has_vocb = false;
  bool has_imat = false;
  bool has_omat = false;
  bool has_lbls = false;
  bool has_svms = false;

  while (cur.remaining() != 0) {
    const auto tag = cur.bytes(4, "section header");
    const std::uint64_t length = cur.u64("section header");
    const auto payload = cur.bytes(static_cast<std::size_t>(length),
                                   "section payload");
    const auto claim = [&](std::string_view& slot, bool& flag) {
      if (flag) {
        raise(Errc::corrupt_section,
              "duplicate section " + std::string(tag));
      }
      slot = payload;
      flag = true;
    };
    if (tag == "CFG0") {
      claim(cfg0, has_cfg0);
    } else if (tag == "VOCB") {
      claim(vocb, has_vocb);
    } else if (tag == "IMAT") {
      claim(imat, has_imat);
    } else if (tag == "OMAT") {
      claim(omat, has_omat);
    } else if (tag == "LBLS") {
      claim(lbls, has_lbls);
    } else if (tag == "SVMS") {
      claim(svms, has_svms);
    } else {
      raise(Errc::corrupt_section, "unknown section " + std::string(tag));
    }
  }
  if (!has_cfg0 || !has_vocb || !has_imat || !has_omat || !has_lbls) {
    raise(Errc::corrupt_section, "missing required section");
  }

  ModelBundle bundle;
  parse_config(cfg0, bundle.model);
  bundle.model.vocab = parse_vocab(vocb);
  bundle.model.input = parse_matrix(imat, "IMAT");
  bundle.model.output = parse_matrix(omat, "OMAT");
  bundle.model.labels = parse_labels(lbls);
  if (has_svms) bundle.svm = parse_svm(svms);
  check_model(bundle.model);
  if (bundle.svm.has_value() &&
      bundle.svm->svm.w.size() != bundle.model.config.dim) {
    raise(Errc::corrupt_section, "svm dim does not match model");
  }
  return bundle;
}

ModelBundle load_model_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(Errc::io_failure, "cannot open " + path.string());
  return load_model(in);
}

VecScope vec_scope_from_name(const std::string& name) {
  if (name == "words") return VecScope::words;
  if (name == "full") return VecScope::full;
  raise(Errc::bad_config, "unknown vector scope: " + name);
}

void export_vectors(const EmbeddingModel& model, VecScope scope,
                    std::ostream& out) {
  const auto write_row = [&](std::string_view token, const auto& row) {
    out << token;
    for (Eigen::Index c = 0; c < row.size(); ++c) {
      out << ' ' << format_coeff(row[c]);
    }
    out << '\n';
  };

  const auto v = static_cast<Eigen::Index>(model.vocab.size());
  if (scope == VecScope::words) {
    const MatrixX<float> composed = composed_word_matrix(model);
    out << v << ' ' << model.dim() << '\n';
    for (Eigen::Index w = 0; w < v; ++w) {
      write_row(model.vocab.word(static_cast<std::size_t>(w)),
                composed.row(w));
    }
  } else {
    out << model.vocab.row_count() << ' ' << model.dim() << '\n';
    for (Eigen::Index w = 0; w < v; ++w) {
      write_row(model.vocab.word(static_cast<std::size_t>(w)),
                model.input.row(w));
    }
    for (std::uint64_t b = 0; b < model.vocab.bucket_count(); ++b) {
      write_row("__bucket__" + std::to_string(b),
                model.input.row(v + static_cast<Eigen::Index>(b)));
    }
  }
  if (!out) raise(Errc::io_failure, "failed to write vectors");
}

void export_vectors_file(const EmbeddingModel& model, VecScope scope,
                         const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) raise(Errc::io_failure, "cannot open " + path.string());
  export_vectors(model, scope, out);
}

std::size_t load_pretrained(EmbeddingModel& model, std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) {
    raise(Errc::malformed_row, "missing vector header");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();

  const auto parse_u64 = [&](std::string_view s) {
    std::uint64_t value = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(),
                                           value);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      raise(Errc::malformed_row, "bad vector header: " + line);
    }
    return value;
  };
  const auto space = line.find(' ');
  if (space == std::string::npos) {
    raise(Errc::malformed_row, "bad vector header: " + line);
  }
  const std::uint64_t declared = parse_u64(
      std::string_view(line).substr(0, space));
  const std::uint64_t dim = parse_u64(
      std::string_view(line).substr(space + 1));
  if (dim != static_cast<std::uint64_t>(model.dim())) {
    raise(Errc::dim_mismatch,
          "vector dim " + std::to_string(dim) + " does not match model dim " +
              std::to_string(model.dim()));
  }

  constexpr std::string_view kBucketPrefix = "__bucket__";
  const auto v = static_cast<Eigen::Index>(model.vocab.size());
  std::size_t applied = 0;
  std::uint64_t rows = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++rows;

    std::string_view rest(line);
    const auto token_end = rest.find(' ');
    if (token_end == std::string_view::npos) {
      raise(Errc::malformed_row, "vector row without values: " + line);
    }
    const std::string_view token = rest.substr(0, token_end);
    rest.remove_prefix(token_end);

    Eigen::Index row = -1;
    if (token.starts_with(kBucketPrefix)) {
      const auto index_text = token.substr(kBucketPrefix.size());
      std::uint64_t bucket = 0;
      const auto [ptr, ec] = std::from_chars(
          index_text.data(), index_text.data() + index_text.size(), bucket);
      if (ec == std::errc() && ptr == index_text.data() + index_text.size() &&
          bucket < model.vocab.bucket_count()) {
        row = v + static_cast<Eigen::Index>(bucket);
      }
    } else {
      const std::int64_t id = model.vocab.word_id(token);
      if (id >= 0) row = static_cast<Eigen::Index>(id);
    }

    Eigen::Index col = 0;
    while (!rest.empty()) {
      if (rest.front() != ' ') {
        raise(Errc::malformed_row, "bad vector row: " + line);
      }
      rest.remove_prefix(1);
      const auto value_end = rest.find(' ');
      const std::string_view value_text =
          value_end == std::string_view::npos ? rest
                                              : rest.substr(0, value_end);
      double value = 0.0;
      const auto [ptr, ec] = std::from_chars(
          value_text.data(), value_text.data() + value_text.size(), value);
      if (ec != std::errc() ||
          ptr != value_text.data() + value_text.size()) {
        raise(Errc::malformed_row, "bad vector value: " + line);
      }
      if (col >= model.dim()) {
        raise(Errc::malformed_row, "too many values: " + line);
      }
      if (row >= 0) model.input(row, col) = static_cast<float>(value);
      ++col;
      rest.remove_prefix(value_text.size());
    }
    if (col != model.dim()) {
      raise(Errc::malformed_row, "too few values: " + line);
    }
    if (row >= 0) ++applied;
  }
  if (rows != declared) {
    raise(Errc::malformed_row,
          "vector row count " + std::to_string(rows) +
              " does not match declared " + std::to_string(declared));
  }
  return applied;
}

std::size_t load_pretrained_file(EmbeddingModel& model,
                                 const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) raise(Errc::io_failure, "cannot open " + path.string());
  return load_pretrained(model, in);
}

}  // namespace fastpacket
