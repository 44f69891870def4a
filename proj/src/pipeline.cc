#include "sift/pipeline.h"

#include <openssl/evp.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>

#include "sift/parallel.h"

namespace sift {

namespace {

std::string Hex(const unsigned char* data, unsigned len) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned i = 0; i < len; ++i) {
    out += kDigits[data[i] >> 4];
    out += kDigits[data[i] & 0xF];
  }
  return out;
}

using DigestCtx = std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)>;

DigestCtx NewDigest() {
  DigestCtx ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 unavailable");
  return ctx;
}

std::string Finish(EVP_MD_CTX* ctx) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned len = 0;
  EVP_DigestFinal_ex(ctx, md.data(), &len);
  return Hex(md.data(), len);
}

void RequireFile(const std::string& path, const char* what) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec))
    throw InputError(std::string(what) + " not found: " + path);
}

}  // namespace

std::string Sha256(std::string_view bytes) {
  DigestCtx ctx = NewDigest();
  EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size());
  return Finish(ctx.get());
}

std::string Sha256File(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw InputError("cannot open " + path);
  DigestCtx ctx = NewDigest();
  std::array<char, 1 << 16> buf;
  while (in) {
    in.read(buf.data(), buf.size());
    EVP_DigestUpdate(ctx.get(), buf.data(),
                     static_cast<std::size_t>(in.gcount()));
  }
  if (in.bad())
    throw InputError("error reading " + path);
  return Finish(ctx.get());
}

LoadedInputs LoadInputs(const InputPaths& paths, unsigned jobs) {
  for (const std::string& p : paths.traces)
    RequireFile(p, "trace file");
  for (const std::string& p : paths.filters)
    RequireFile(p, "filter list");
  RequireFile(paths.psl, "public suffix list");

  LoadedInputs inputs;
  try {
    inputs.psl = PublicSuffixList::LoadFile(paths.psl);
  } catch (const std::exception& e) {
    throw InputError(e.what());
  }
  inputs.provenance.psl = {paths.psl, Sha256File(paths.psl)};

  std::vector<FilterRule> rules;
  for (const std::string& p : paths.filters) {
    FilterParseResult parsed;
    try {
      parsed = ParseFilterListFile(p);
    } catch (const std::exception& e) {
      throw InputError(e.what());
    }
    rules.insert(rules.end(), std::make_move_iterator(parsed.rules.begin()),
                 std::make_move_iterator(parsed.rules.end()));
    inputs.filter_diagnostics.insert(inputs.filter_diagnostics.end(),
                                     parsed.diagnostics.begin(),
                                     parsed.diagnostics.end());
    inputs.provenance.filters.push_back({p, Sha256File(p)});
  }
  inputs.rules = RuleSet(std::move(rules));

  const bool qualify = paths.traces.size() > 1;
  for (std::size_t i = 0; i < paths.traces.size(); ++i) {
    const std::string& p = paths.traces[i];
    TraceParseResult parsed;
    try {
      parsed = ParseTraceFile(p, jobs);
    } catch (const TraceIoError& e) {
      throw InputError(e.what());
    }
    for (TraceDiagnostic& d : parsed.diagnostics)
      inputs.trace_diagnostics.push_back({p, std::move(d)});
    for (RequestRecord& r : parsed.records) {
      if (qualify)
        r.request_id = std::to_string(i) + ":" + r.request_id;
      inputs.records.push_back(std::move(r));
    }
    inputs.provenance.traces.push_back({p, Sha256File(p)});
  }
  return inputs;
}

RequestContext ContextFor(const RequestRecord& record,
                          const PublicSuffixList& psl) {
  UrlParts page = DecomposeUrl(record.top_level_url, psl);
  return MakeRequestContext(DecomposeUrl(record.url, psl),
                            std::move(page.registrable_domain),
                            record.resource_type);
}

std::vector<LabeledRecord> LabelRecords(
    const std::vector<RequestRecord>& records, const RuleSet& rules,
    const PublicSuffixList& psl, unsigned jobs,
    std::vector<LabelDecision>* decisions) {
  std::vector<LabeledRecord> labeled(records.size());
  std::vector<LabelDecision> local;
  std::vector<LabelDecision>& out = decisions ? *decisions : local;
  out.assign(records.size(), {});
  ParallelChunks(records.size(), jobs,
                 [&](std::size_t, std::size_t begin, std::size_t end) {
                   for (std::size_t i = begin; i < end; ++i) {
                     out[i] = rules.Decide(ContextFor(records[i], psl));
                     labeled[i] = {records[i], out[i].label};
                   }
                 });
  return labeled;
}

InputStats StatsFor(const LoadedInputs& inputs) {
  return {inputs.records.size(), inputs.trace_diagnostics.size(),
          inputs.rules.rules().size(), inputs.filter_diagnostics.size()};
}

}  // namespace sift
