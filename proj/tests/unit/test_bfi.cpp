#include "doctest.h"
#include "psim/evaluation/bfi.hpp"
#include "support.hpp"

using namespace psim;
using namespace psim::eval;

namespace {

BfiAnswerSheet uniform(int v) { return {"ann", 1, std::vector<int>(kBfiItemCount, v)}; }

int total(const BigFiveVector& v) {
  return v.extraversion + v.agreeableness + v.conscientiousness + v.neuroticism + v.openness;
}

}  // namespace

TEST_SUITE("bfi") {
  TEST_CASE("item key") {
    const auto& items = bfi_items();
    int reversed = 0;
    for (std::size_t i = 0; i < items.size(); ++i) {
      CHECK(items[i].number == static_cast<int>(i + 1));
      CHECK_FALSE(items[i].text.empty());
      reversed += items[i].reverse;
    }
    CHECK(reversed == 16);
    CHECK(dimension_item_count(BigFiveDim::Extraversion) == 8);
    CHECK(dimension_item_count(BigFiveDim::Agreeableness) == 9);
    CHECK(dimension_item_count(BigFiveDim::Conscientiousness) == 9);
    CHECK(dimension_item_count(BigFiveDim::Neuroticism) == 8);
    CHECK(dimension_item_count(BigFiveDim::Openness) == 10);
    CHECK(items[0].dim == BigFiveDim::Extraversion);
    CHECK(items[5].reverse);  // "is reserved"
    CHECK(items[40].dim == BigFiveDim::Openness);
    CHECK(items[40].reverse);
  }

  TEST_CASE("all threes") {
    auto s = score_bfi(uniform(3));
    CHECK(s.day == 1);
    CHECK(s.scores.extraversion == 24);
    CHECK(s.scores.agreeableness == 27);
    CHECK(s.scores.conscientiousness == 27);
    CHECK(s.scores.neuroticism == 24);
    CHECK(s.scores.openness == 30);
    CHECK(dimension_score(s.scores, BigFiveDim::Openness) == 30);
  }

  TEST_CASE("single-item perturbation moves exactly one dimension") {
    const auto base = score_bfi(uniform(3)).scores;
    for (std::size_t i = 0; i < kBfiItemCount; ++i) {
      for (int v : {1, 2, 4, 5}) {
        auto sheet = uniform(3);
        sheet.answers[i] = v;
        const auto s = score_bfi(sheet).scores;
        int changed = 0;
        for (int d = 0; d < 5; ++d) {
          const auto dim = static_cast<BigFiveDim>(d);
          const int delta = dimension_score(s, dim) - dimension_score(base, dim);
          if (delta != 0) {
            ++changed;
            CHECK(dim == bfi_items()[i].dim);
            CHECK(delta == (bfi_items()[i].reverse ? 3 - v : v - 3));
          }
        }
        CHECK(changed == 1);
      }
    }
  }

  TEST_CASE("score bounds") {
    auto low = score_bfi(uniform(1)).scores;
    auto high = score_bfi(uniform(5)).scores;
    CHECK(total(low) + total(high) == 6 * 44);
    BfiAnswerSheet sheet = uniform(1);
    for (std::size_t i = 0; i < kBfiItemCount; ++i) sheet.answers[i] = bfi_items()[i].reverse ? 1 : 5;
    auto max = score_bfi(sheet).scores;
    CHECK(max.extraversion == 40);
    CHECK(max.openness == 50);
    CHECK(max.in_range());
  }

  TEST_CASE("invalid sheets") {
    auto shortsheet = uniform(3);
    shortsheet.answers.pop_back();
    CHECK(*sheet_problem(shortsheet) == "expected 44 answers, got 43");
    auto bad = uniform(3);
    bad.answers[6] = 0;
    CHECK(*sheet_problem(bad) == "item 7 answer 0 outside 1..5");
    CHECK_FALSE(sheet_problem(uniform(5)));
    CHECK_THROWS_AS(score_bfi(bad), InputError);
  }

  TEST_CASE("administration over several days") {
    auto backend = std::make_shared<test::StubBackend>(3);
    lm::LmClient client(backend);
    Kernel k(test::three_agents(1));
    k.run();
    const json view = k.character_view("sophia", std::nullopt);
    auto sheets = administer_bfi("sophia", {{1, view}, {2, view}}, client);
    REQUIRE(sheets.size() == 2);
    CHECK(sheets[0].day == 1);
    CHECK(sheets[1].day == 2);
    for (const auto& s : sheets) CHECK_FALSE(sheet_problem(s));
    CHECK(backend->count(lm::PromptKind::BfiFill) == 1);
    CHECK(backend->requests.front().context.at("days").size() == 2);

    auto broken = std::make_shared<test::StubBackend>(3);
    json short_sheet = {{"day", 1}, {"answers", json::array({3, 3})}};
    json payload = {{"sheets", json::array({short_sheet})}};
    broken->push(lm::PromptKind::BfiFill, payload);
    broken->push(lm::PromptKind::BfiFill, payload);
    lm::LmClient bad_client(broken);
    CHECK_THROWS_AS(administer_bfi("sophia", {{1, view}}, bad_client), SchemaError);
    CHECK(broken->count(lm::PromptKind::BfiFill) == 2);
  }
}
