#include "doctest.h"
#include "psim/character.hpp"
#include "support.hpp"

using namespace psim;

namespace {

const char* kBrief = "Ava is a cheerful nurse who loves hiking and wants to open a clinic.";

json valid_init_payload() {
  return {{"basic_info", {{"name", "Ava"}, {"gender", "female"}, {"age", "29"}, {"profession", "nurse"}}},
          {"current_state", "Tired after a night shift."},
          {"traits", "Cheerful and patient."},
          {"conflict", "Wants to help everyone but is exhausted."},
          {"preference",
           {{"ultimate_goal", "open a clinic"},
            {"long_term_goal", "save money to open a clinic"},
            {"short_term_goal", "research how to open a clinic"},
            {"daily_routine", "Works shifts and hikes on weekends."},
            {"hobbies", {"hiking"}},
            {"venue_preference", {"Park"}}}}};
}

}  // namespace

TEST_SUITE("character") {
  TEST_CASE("scripted init yields a valid structure") {
    auto backend = std::make_shared<lm::ScriptedBackend>(3);
    lm::LmClient client(backend);
    auto cs = init_character(kBrief, client);
    CHECK(validate_structure(cs).empty());
    CHECK(cs.revision == 0);
    CHECK_FALSE(cs.traits.big_five);
    CHECK(init_character(kBrief, client) == cs);
  }

  TEST_CASE("init retries invalid structures then gives up") {
    auto stub = std::make_shared<test::StubBackend>();
    json bad = valid_init_payload();
    bad["preference"]["long_term_goal"] = "learn to paint";
    stub->push(lm::PromptKind::CharInit, bad);
    stub->push(lm::PromptKind::CharInit, valid_init_payload());
    lm::LmClient client(stub);
    auto cs = init_character(kBrief, client);
    CHECK(cs.name() == "Ava");
    REQUIRE(stub->requests.size() == 2);
    CHECK(stub->requests[1].context.at("problem").get<std::string>().find("long_term_goal") != std::string::npos);

    auto stub2 = std::make_shared<test::StubBackend>();
    for (int i = 0; i < 3; ++i) stub2->push(lm::PromptKind::CharInit, bad);
    lm::LmClient client2(stub2);
    CHECK_THROWS_AS(init_character(kBrief, client2), SchemaError);
    CHECK(stub2->requests.size() == 3);
  }

  TEST_CASE("init rejects empty briefs and surfaces backend failure") {
    auto stub = std::make_shared<test::StubBackend>();
    lm::LmClient client(stub);
    CHECK_THROWS_AS(init_character("   ", client), InputError);
    stub->fail(lm::PromptKind::CharInit);
    CHECK_THROWS_AS(init_character(kBrief, client), BackendError);
  }

  TEST_CASE("validate_structure names each violation") {
    auto stub = std::make_shared<test::StubBackend>();
    stub->push(lm::PromptKind::CharInit, valid_init_payload());
    lm::LmClient client(stub);
    auto cs = init_character(kBrief, client);
    CHECK(validate_structure(cs).empty());

    auto broken = cs;
    broken.basic_info.erase("age");
    broken.conflict = "  ";
    broken.preference.hobbies.clear();
    auto report = validate_structure(broken);
    CHECK(report == std::vector<std::string>{"basic_info.age", "conflict", "preference.hobbies"});

    auto grown = cs;
    grown.revision = 1;
    grown.basic_info["name"] = "Eve";
    report = validate_structure(grown, &cs);
    CHECK(report == std::vector<std::string>{"basic_info immutability"});
    CHECK(validate_structure(cs, &grown) == std::vector<std::string>{"basic_info immutability", "revision monotonicity"});

    auto scored = cs;
    scored.traits.big_five = BigFiveVector{10, 9, 8, 9, 8};
    CHECK(validate_structure(scored).empty());
    scored.traits.big_five->openness = 51;
    CHECK(validate_structure(scored) == std::vector<std::string>{"traits.big_five range"});
  }

  TEST_CASE("json round trip") {
    auto stub = std::make_shared<test::StubBackend>();
    stub->push(lm::PromptKind::CharInit, valid_init_payload());
    lm::LmClient client(stub);
    auto cs = init_character(kBrief, client);
    cs.traits.big_five = BigFiveVector{30, 27, 24, 27, 24};
    cs.revision = 4;
    json j = cs;
    CHECK(j.get<CharacterStructure>() == cs);
  }

  TEST_CASE("summary keeps the emphasized dimension verbatim") {
    auto backend = std::make_shared<lm::ScriptedBackend>(5);
    lm::LmClient client(backend);
    auto cs = init_character(kBrief, client);
    for (int i = 0; i < 5; ++i) {
      auto d = static_cast<Dimension>(i);
      auto s = summarize_character(cs, d, client, 8);
      CHECK(s.dimensions.size() == 5);
      CHECK(s.dimensions.at(std::string(dimension_name(d))) == dimension_text(cs, d));
      for (const auto& [key, text] : s.dimensions) {
        if (key != dimension_name(d)) CHECK(word_count(text) <= 8);
      }
    }
    auto plain = summarize_character(cs, std::nullopt, client, 5);
    for (const auto& [key, text] : plain.dimensions) CHECK(word_count(text) <= 5);
    CHECK(plain.source_revision == cs.revision);
  }

  TEST_CASE("persona paragraph and dimension names") {
    auto stub = std::make_shared<test::StubBackend>();
    stub->push(lm::PromptKind::CharInit, valid_init_payload());
    lm::LmClient client(stub);
    auto cs = init_character(kBrief, client);
    auto text = persona_paragraph(cs);
    CHECK(text.find("Ava") != std::string::npos);
    CHECK(text.find("hiking") != std::string::npos);
    for (int i = 0; i < 5; ++i) CHECK(parse_dimension(dimension_name(static_cast<Dimension>(i))) == static_cast<Dimension>(i));
    CHECK_FALSE(parse_dimension("mood"));
  }

  TEST_CASE("word helpers") {
    CHECK(word_count("") == 0);
    CHECK(word_count("  one two\tthree \n") == 3);
    CHECK(truncate_words("a b  c d", 2) == "a b");
    CHECK(truncate_words("a b", 5) == "a b");
  }
}
