#include <gtest/gtest.h>

#include <json.hpp>

#include "iop/local_state.hpp"
#include "iop/message.hpp"

using namespace iop;

namespace {

MessageInstance payment(std::string id, std::string paid) {
  return {"Flexible Purchase", "Payment", "sys", {{"ID", id}, {"item", "fig"}, {"paid", paid}}};
}

}  // namespace

TEST(Wire, RoundTrip) {
  const auto m = payment("1", "10");
  const auto text = encode(m);
  EXPECT_EQ(decode(text), m);
  EXPECT_EQ(encode(decode(text)), text);
}

TEST(Wire, DocumentShape) {
  const auto j = nlohmann::json::parse(encode(payment("1", "10")));
  EXPECT_EQ(j["protocol"], "Flexible Purchase");
  EXPECT_EQ(j["message"], "Payment");
  EXPECT_EQ(j["system"], "sys");
  EXPECT_EQ(j["payload"]["paid"], "10");
}

TEST(Wire, EqualInstancesEncodeIdentically) {
  MessageInstance a = payment("1", "10");
  MessageInstance b{a.protocol, a.message, a.system, {}};
  b.bindings["paid"] = "10";
  b.bindings["item"] = "fig";
  b.bindings["ID"] = "1";
  EXPECT_EQ(encode(a), encode(b));
}

TEST(Wire, UnicodeValuesSurvive) {
  auto m = payment("1", "€10 ↦ ok");
  EXPECT_EQ(decode(encode(m)), m);
}

TEST(Wire, RejectsMalformed) {
  for (const auto* bad : {"", "not json", "[]", "{}", R"({"protocol":"P","message":"M","system":"s"})",
                          R"({"protocol":"P","message":"M","system":"s","payload":{"a":1}})",
                          R"({"protocol":1,"message":"M","system":"s","payload":{}})",
                          R"({"protocol":"P","message":"M","system":"s","payload":[]})"})
    EXPECT_THROW(decode(bad), WireError) << bad;
}

TEST(LocalState, IdentityAndKnowledge) {
  LocalState s(std::vector<std::string>{"ID"});
  EXPECT_EQ(s.add(payment("1", "10"), Direction::Sent), LocalState::Admission::Added);
  const auto id = s.id_of(payment("1", "10"));
  EXPECT_EQ(id.message, "Payment");
  EXPECT_EQ(id.enactment, (EnactmentKey{"sys", {"1"}}));
  ASSERT_NE(s.find(id), nullptr);
  EXPECT_EQ(s.find(id)->direction, Direction::Sent);
  const auto* k = s.knowledge(id.enactment);
  ASSERT_NE(k, nullptr);
  EXPECT_EQ(k->at("paid"), "10");
  EXPECT_TRUE(s.has("Payment", id.enactment, Direction::Sent));
  EXPECT_FALSE(s.has("Payment", id.enactment, Direction::Received));
}

TEST(LocalState, DuplicatesAndConflicts) {
  LocalState s(std::vector<std::string>{"ID"});
  s.add(payment("1", "10"), Direction::Received);
  EXPECT_EQ(s.add(payment("1", "10"), Direction::Received), LocalState::Admission::Duplicate);
  EXPECT_EQ(s.add(payment("1", "99"), Direction::Received), LocalState::Admission::Conflict);
  // another message may not rebind item in the same enactment
  MessageInstance other{"Flexible Purchase", "Request", "sys", {{"ID", "1"}, {"item", "jam"}}};
  EXPECT_EQ(s.classify(other), LocalState::Admission::Conflict);
  EXPECT_EQ(s.size(), 1u);
  // a different system is a different enactment
  auto elsewhere = payment("1", "99");
  elsewhere.system = "other";
  EXPECT_EQ(s.add(elsewhere, Direction::Received), LocalState::Admission::Added);
  EXPECT_EQ(s.enactments("sys").size(), 1u);
}

TEST(LocalState, MissingKeyThrows) {
  LocalState s(std::vector<std::string>{"ID"});
  MessageInstance m{"P", "Request", "sys", {{"item", "fig"}}};
  EXPECT_THROW(s.key_of(m), std::invalid_argument);
  m.bindings["ID"] = "";
  EXPECT_THROW(s.key_of(m), std::invalid_argument);
}

TEST(LocalState, QueryByExample) {
  LocalState s(std::vector<std::string>{"ID"});
  s.add(payment("1", "10"), Direction::Sent);
  s.add(payment("2", "10"), Direction::Sent);
  auto third = payment("3", "12");
  third.system = "other";
  s.add(third, Direction::Sent);
  EXPECT_EQ(s.messages("Payment").size(), 3u);
  EXPECT_EQ(s.messages("Payment", "sys").size(), 2u);
  EXPECT_EQ(s.messages("Payment", {}, {{"paid", "12"}}).size(), 1u);
  EXPECT_EQ(s.messages("Payment", "sys", {{"ID", "2"}}).size(), 1u);
  EXPECT_TRUE(s.messages("Shipment").empty());
}

TEST(LocalState, EqualityIgnoresArrivalOrder) {
  LocalState a(std::vector<std::string>{"ID"}), b(std::vector<std::string>{"ID"});
  a.add(payment("1", "10"), Direction::Received);
  a.add(payment("2", "10"), Direction::Received);
  b.add(payment("2", "10"), Direction::Received);
  b.add(payment("1", "10"), Direction::Received);
  EXPECT_EQ(a, b);
  LocalState c(std::vector<std::string>{"ID"});
  c.add(payment("1", "10"), Direction::Sent);
  c.add(payment("2", "10"), Direction::Received);
  EXPECT_NE(a, c);
}
