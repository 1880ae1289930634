// Copyright 2026 The clifvqa Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <numeric>

#include "clifvqa/clip_tokenizer.hpp"
#include "clifvqa/encoder.hpp"
#include "clifvqa/error.hpp"
#include "clifvqa/hashing.hpp"
#include "clifvqa/prompt_bank.hpp"
#include "synthetic.hpp"

namespace clifvqa {
namespace {

double norm(const Embedding& e) {
  double s = 0;
  for (float v : e.values()) s += static_cast<double>(v) * v;
  return std::sqrt(s);
}

Image block(float fill) { return Image(kBlockSize, kBlockSize, fill); }

TEST(MockEncoder, ImageEmbeddingIsDeterministicAndUnitNorm) {
  const MockEncoder enc(7);
  const auto a = enc.embed_image(block(0.3f));
  EXPECT_EQ(a, enc.embed_image(block(0.3f)));
  EXPECT_EQ(a.dim(), 512u);
  EXPECT_NEAR(norm(a), 1.0, 1e-5);
  EXPECT_EQ(a, MockEncoder(7).embed_image(block(0.3f)));
}

TEST(MockEncoder, OnePixelChangesTheEmbedding) {
  const MockEncoder enc(7);
  auto b = block(0.3f);
  const auto a = enc.embed_image(b);
  b.at(100, 17, 2) = 0.31f;
  const auto c = enc.embed_image(b);
  EXPECT_NE(a, c);
  EXPECT_LT(cosine(a, c), 1.0 - 1e-6);
}

TEST(MockEncoder, MatchesHashConstruction) {
  // Keyed hash of (domain, seed, UTF-8 bytes) seeds the generator.
  const MockEncoder enc(42, 16);
  Sha256 h;
  h.update("clifvqa.mock.text").update_u64(42).update("bright");
  const auto d = h.finish();
  std::uint64_t key = 0;
  for (int i = 0; i < 8; ++i) key |= std::uint64_t{d[i]} << (8 * i);
  SplitMix64 rng(key);
  std::vector<double> raw(16);
  double n = 0;
  for (auto& v : raw) {
    v = static_cast<float>(rng.normal());
    n += v * v;
  }
  const auto e = enc.embed_texts(std::vector<std::string>{"bright"})[0];
  for (std::size_t i = 0; i < raw.size(); ++i) EXPECT_NEAR(e.values()[i], raw[i] / std::sqrt(n), 1e-6);
}

TEST(MockEncoder, SeedMatters) {
  EXPECT_NE(MockEncoder(1).embed_image(block(0.5f)), MockEncoder(2).embed_image(block(0.5f)));
}

TEST(MockEncoder, RejectsWrongBlockSize) {
  const MockEncoder enc(0);
  EXPECT_THROW(enc.embed_image(Image(224, 225)), std::invalid_argument);
  EXPECT_THROW(enc.embed_image(Image(223, 224)), std::invalid_argument);
}

TEST(MockEncoder, TextEmbeddings) {
  const MockEncoder enc(3);
  const std::vector<std::string> p = {"a bright photo"};
  EXPECT_EQ(enc.embed_texts(p)[0], enc.embed_texts(p)[0]);
  std::vector<std::string> twelve;
  for (int i = 0; i < 12; ++i) twelve.push_back("prompt " + std::to_string(i));
  const auto all = enc.embed_texts(twelve);
  ASSERT_EQ(all.size(), 12u);
  for (int i = 0; i < 12; ++i) EXPECT_EQ(all[i], enc.embed_texts(std::vector<std::string>{twelve[i]})[0]);
  const auto bb = enc.embed_texts(std::vector<std::string>{"bright", "blurry"});
  EXPECT_LT(cosine(bb[0], bb[1]), 1.0);
  EXPECT_THROW(enc.embed_texts(std::vector<std::string>{}), std::invalid_argument);
  EXPECT_THROW(enc.embed_texts(std::vector<std::string>{"ok", ""}), std::invalid_argument);
}

TEST(Embedding, NormalizeRejectsDegenerate) {
  EXPECT_THROW(Embedding::normalized(std::vector<float>{0, 0}), std::invalid_argument);
  EXPECT_THROW(Embedding::normalized(std::vector<float>{NAN, 1}), std::invalid_argument);
  const auto e = Embedding::normalized(std::vector<float>{3, 4});
  EXPECT_FLOAT_EQ(e.values()[0], 0.6f);
  EXPECT_FLOAT_EQ(e.values()[1], 0.8f);
}

Embedding unit(std::vector<float> v) { return Embedding::normalized(v); }

TEST(SemanticScores, EqualCosinesGiveUniform) {
  const auto img = unit({1, 0, 0});
  const std::vector<Embedding> texts = {unit({0, 1, 0}), unit({0, 0, 1}), unit({0, -1, 0}), unit({0, 0, -1})};
  for (double p : semantic_scores(img, texts, 100.0)) EXPECT_NEAR(p, 0.25, 1e-12);
}

TEST(SemanticScores, TwoPromptClosedForm) {
  // cosines 0.3 and 0.1 at scale 100: softmax(30, 10) = (1/(1+e^-20), e^-20/(1+e^-20)).
  const auto img = unit({1, 0});
  const double c1 = 0.3, c2 = 0.1;
  const std::vector<Embedding> texts = {unit({static_cast<float>(c1), static_cast<float>(std::sqrt(1 - c1 * c1))}),
                                        unit({static_cast<float>(c2), static_cast<float>(std::sqrt(1 - c2 * c2))})};
  const double a = 100.0 * cosine(img, texts[0]), b = 100.0 * cosine(img, texts[1]);
  const auto p = semantic_scores(img, texts, 100.0);
  const double expect_small = 1.0 / (1.0 + std::exp(a - b));
  EXPECT_NEAR(p[1], expect_small, 1e-15);
  EXPECT_NEAR(p[1], 2.06e-9, 0.01e-9);
  EXPECT_NEAR(p[0], 1.0 - 2.06e-9, 1e-11);
}

TEST(SemanticScores, SingleAndDimensionMismatch) {
  const auto img = unit({1, 2});
  EXPECT_EQ(semantic_scores(img, std::vector<Embedding>{unit({2, 1})}, 100.0), std::vector<double>{1.0});
  EXPECT_THROW(semantic_scores(img, std::vector<Embedding>{unit({1, 2, 3})}, 100.0), std::invalid_argument);
}

TEST(SemanticScores, RandomRowsSumToOneAndShiftInvariant) {
  SplitMix64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> logits(1 + rng.uniform_int(20));
    for (auto& l : logits) l = rng.uniform(-50, 50);
    const auto p = softmax(logits);
    EXPECT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), 1.0, 1e-12);
    auto shifted = logits;
    const double c = rng.uniform(-1000, 1000);
    for (auto& l : shifted) l += c;
    const auto q = softmax(shifted);
    for (std::size_t k = 0; k < p.size(); ++k) {
      EXPECT_GE(p[k], 0.0);
      EXPECT_LE(p[k], 1.0);
      EXPECT_NEAR(p[k], q[k], 1e-9);
    }
  }
}

TEST(MakeEncoder, Dispatch) {
  EncoderConfig c;
  c.mock_seed = 9;
  c.mock_dim = 32;
  const auto enc = make_encoder(c);
  EXPECT_EQ(enc->dim(), 32u);
  EXPECT_EQ(enc->fingerprint(), "mock:seed=9:dim=32");
  c.backend = "nonsense";
  EXPECT_THROW(make_encoder(c), ValidationError);
  c.backend = "pretrained";
  EXPECT_THROW(make_encoder(c), ValidationError);  // no model paths
  c = {};
  c.logit_scale = 0;
  EXPECT_THROW(make_encoder(c), ValidationError);
}

// --- tokenizer -------------------------------------------------------------

TEST(ClipTokenizer, PreTokenizeContract) {
  using V = std::vector<std::string>;
  EXPECT_EQ(ClipTokenizer::pre_tokenize("A  Bright\tPHOTO"), (V{"a", "bright", "photo"}));
  EXPECT_EQ(ClipTokenizer::pre_tokenize("it's 2024!!"), (V{"it", "'s", "2", "0", "2", "4", "!!"}));
  EXPECT_EQ(ClipTokenizer::pre_tokenize("<|startoftext|>hi<|endoftext|>"),
            (V{"<|startoftext|>", "hi", "<|endoftext|>"}));
  EXPECT_EQ(ClipTokenizer::pre_tokenize("we'll they're"), (V{"we", "'ll", "they", "'re"}));
  EXPECT_EQ(ClipTokenizer::pre_tokenize("caf\xC3\xA9 ok"), (V{"caf\xC3\xA9", "ok"}));
  EXPECT_EQ(ClipTokenizer::clean_text("  a \n b  "), "a b");
}

TEST(ClipTokenizer, BpeAppliesMergesByRank) {
  const std::vector<ClipTokenizer::Merge> merges = {{"l", "o"}, {"lo", "w</w>"}, {"e", "r</w>"}};
  const ClipTokenizer tok(merges);
  EXPECT_EQ(tok.bpe("low"), (std::vector<std::string>{"low</w>"}));
  EXPECT_EQ(tok.bpe("lower"), (std::vector<std::string>{"lo", "w", "er</w>"}));
  EXPECT_EQ(tok.bpe("x"), (std::vector<std::string>{"x</w>"}));
  // 256 bytes, 256 end-of-word bytes, the merges, then the two specials.
  EXPECT_EQ(tok.vocab_size(), 512u + merges.size() + 2u);
  EXPECT_EQ(tok.sot_id(), 515);
  EXPECT_EQ(tok.eot_id(), 516);
  EXPECT_EQ(tok.encode("low"), (std::vector<std::int64_t>{tok.token_id("low</w>")}));
  EXPECT_EQ(tok.token_id("low</w>"), 513);
}

TEST(ClipTokenizer, ContextPadding) {
  const std::vector<ClipTokenizer::Merge> merges = {{"l", "o</w>"}};
  const ClipTokenizer tok(merges);
  const auto ctx = tok.encode_context("lo lo");
  ASSERT_EQ(ctx.size(), ClipTokenizer::kContextLength);
  EXPECT_EQ(ctx[0], tok.sot_id());
  EXPECT_EQ(ctx[3], tok.eot_id());
  EXPECT_EQ(ctx[4], 0);
  EXPECT_THROW(tok.encode_context(std::string(200, 'a') + " " + std::string(200, 'b'), 4), std::exception);
}

TEST(ClipTokenizer, FromPlainFileSkipsHeader) {
  const auto dir = testing::scratch_dir("vocab");
  {
    std::ofstream out(dir / "merges.txt");
    out << "#version: 0.2\nl o\nlo w</w>\n";
  }
  const auto tok = ClipTokenizer::from_file(dir / "merges.txt");
  EXPECT_EQ(tok.bpe("low"), (std::vector<std::string>{"low</w>"}));
  EXPECT_THROW(ClipTokenizer::from_file(dir / "missing.txt"), std::exception);
}

// --- prompt bank -----------------------------------------------------------

TEST(PromptBank, DefaultBankContents) {
  const auto bank = PromptBank::default_bank();
  ASSERT_EQ(bank.size(), 16u);
  const auto& d = bank.descriptions();
  EXPECT_EQ(d[0].text, "bright");
  EXPECT_EQ(d[1].text, "blurry");
  EXPECT_EQ(d[2].text, "noisy");
  EXPECT_EQ(d[3].text, "colorful");
  for (std::size_t i = 0; i < 8; ++i) EXPECT_EQ(d[i].kind, DescriptionKind::kObjective);
  for (std::size_t i = 8; i < 16; ++i) EXPECT_EQ(d[i].kind, DescriptionKind::kSubjective);
  for (const char* s : {"interesting", "exciting", "depressing", "fearful", "pleasant", "boring"}) {
    const auto idx = bank.index_of(s);
    ASSERT_TRUE(idx) << s;
    EXPECT_EQ(d[*idx].kind, DescriptionKind::kSubjective);
  }
  for (const char* s : {"dark", "sharp", "clean", "contrast"}) EXPECT_TRUE(bank.index_of(s)) << s;
  for (std::size_t i = 0; i < d.size(); ++i) EXPECT_EQ(d[i].index, i);
  EXPECT_EQ(bank.digest(), PromptBank::default_bank().digest());
}

TEST(PromptBank, Subsets) {
  const auto bank = PromptBank::default_bank();
  const auto obj = bank.subset({DescriptionKind::kObjective});
  ASSERT_EQ(obj.size(), 8u);
  for (const auto& d : obj.descriptions()) EXPECT_EQ(d.kind, DescriptionKind::kObjective);
  EXPECT_NE(obj.digest(), bank.digest());
  const auto sub = bank.subset({DescriptionKind::kSubjective});
  EXPECT_EQ(sub.descriptions()[0].index, 0u);
  EXPECT_EQ(sub.descriptions()[0].text, bank.descriptions()[8].text);
  EXPECT_EQ(bank.subset({DescriptionKind::kObjective, DescriptionKind::kSubjective}).digest(), bank.digest());
  EXPECT_EQ(obj.subset({DescriptionKind::kObjective}).digest(), obj.digest());
  EXPECT_THROW(obj.subset({DescriptionKind::kSubjective}), ValidationError);
  EXPECT_THROW(bank.subset({}), ValidationError);
}

TEST(PromptBank, DigestTracksTextKindAndOrder) {
  using K = DescriptionKind;
  const PromptBank a({{K::kObjective, "bright"}, {K::kSubjective, "calm"}});
  const PromptBank b({{K::kSubjective, "calm"}, {K::kObjective, "bright"}});
  const PromptBank c({{K::kObjective, "bright"}, {K::kObjective, "calm"}});
  const PromptBank d({{K::kObjective, "bright"}, {K::kSubjective, "calmer"}});
  EXPECT_NE(a.digest(), b.digest());
  EXPECT_NE(a.digest(), c.digest());
  EXPECT_NE(a.digest(), d.digest());
  EXPECT_THROW(PromptBank({{K::kObjective, "x"}, {K::kSubjective, "x"}}), ValidationError);
  EXPECT_THROW(PromptBank({{K::kObjective, "  "}}), ValidationError);
}

TEST(PromptBank, FileAndKinds) {
  const auto dir = testing::scratch_dir("prompts");
  {
    std::ofstream out(dir / "p.csv");
    out << "# comment\nobjective,Bright\n\nsubjective,calm\n";
  }
  const auto bank = PromptBank::from_file(dir / "p.csv");
  ASSERT_EQ(bank.size(), 2u);
  EXPECT_EQ(bank.rendered(), (std::vector<std::string>{"bright", "calm"}));
  EXPECT_EQ(bank.rendered("a {} photo"), (std::vector<std::string>{"a bright photo", "a calm photo"}));
  {
    std::ofstream out(dir / "bad.csv");
    out << "objective bright\n";
  }
  EXPECT_THROW(PromptBank::from_file(dir / "bad.csv"), ValidationError);
  EXPECT_EQ(parse_kinds("all").size(), 2u);
  EXPECT_EQ(parse_kinds("obj"), std::set<DescriptionKind>{DescriptionKind::kObjective});
  EXPECT_THROW(parse_kinds("objectivity"), ValidationError);
}

}  // namespace
}  // namespace clifvqa
