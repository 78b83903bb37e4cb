// Copyright 2026 The hydfuzz Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "hydfuzz/program_model.hpp"
#include "toml.hpp"

namespace hydfuzz {

namespace {

[[noreturn]] void Fail(const toml::node& at, const std::string& what) {
  const auto& src = at.source();
  throw SyntaxError(what, src.begin.line, src.begin.column);
}

const toml::table& AsTable(const toml::node& n, const std::string& what) {
  const toml::table* t = n.as_table();
  if (t == nullptr) Fail(n, what + " must be a table");
  return *t;
}

const toml::node& Require(const toml::table& t, std::string_view key,
                          const std::string& ctx) {
  const toml::node* n = t.get(key);
  if (n == nullptr) Fail(t, ctx + ": missing key '" + std::string(key) + "'");
  return *n;
}

std::string RequireString(const toml::table& t, std::string_view key,
                          const std::string& ctx) {
  const toml::node& n = Require(t, key, ctx);
  auto v = n.value<std::string>();
  if (!v) Fail(n, ctx + ": '" + std::string(key) + "' must be a string");
  return *v;
}

std::int64_t RequireInt(const toml::table& t, std::string_view key,
                        const std::string& ctx) {
  const toml::node& n = Require(t, key, ctx);
  const auto* v = n.as_integer();
  if (v == nullptr) {
    Fail(n, ctx + ": '" + std::string(key) + "' must be an integer");
  }
  return v->get();
}

BlockId RequireBlockId(const toml::table& t, std::string_view key,
                       const std::string& ctx) {
  const std::int64_t v = RequireInt(t, key, ctx);
  if (v < 0 || v > std::int64_t{0xFFFFFFFF}) {
    Fail(*t.get(key), ctx + ": block id out of range");
  }
  return static_cast<BlockId>(v);
}

// Integers above INT64_MAX can be written as strings ("0xFFFFFFFFFFFFFFFF").
std::uint64_t RequireConstant(const toml::table& t, const std::string& ctx) {
  const toml::node& n = Require(t, "constant", ctx);
  if (const auto* i = n.as_integer()) {
    if (i->get() < 0) Fail(n, ctx + ": constant must be non-negative");
    return static_cast<std::uint64_t>(i->get());
  }
  if (const auto* s = n.as_string()) {
    const std::string& text = s->get();
    errno = 0;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(text.c_str(), &end, 0);
    if (errno != 0 || end == text.c_str() || *end != '\0' ||
        text.front() == '-') {
      Fail(n, ctx + ": constant '" + text + "' is not an unsigned integer");
    }
    return v;
  }
  Fail(n, ctx + ": constant must be an integer or a numeric string");
}

Terminator ParseTerminator(const toml::table& term, const std::string& ctx) {
  const std::string kind = RequireString(term, "kind", ctx);
  if (kind == "goto") return term::Goto{RequireBlockId(term, "next", ctx)};
  if (kind == "return") return term::Return{};
  if (kind == "crash") return term::Crash{};
  if (kind == "halt") return term::Halt{};
  if (kind == "call") {
    return term::Call{RequireString(term, "function", ctx),
                      RequireBlockId(term, "return_to", ctx)};
  }
  if (kind == "branch") {
    term::Branch br;
    const toml::node& offs = Require(term, "offsets", ctx);
    const toml::array* arr = offs.as_array();
    if (arr == nullptr) Fail(offs, ctx + ": offsets must be an array");
    for (const toml::node& o : *arr) {
      const auto* i = o.as_integer();
      if (i == nullptr || i->get() < 0 || i->get() > 0xFFFFFF) {
        Fail(o, ctx + ": offsets must be non-negative integers");
      }
      br.cond.offsets.push_back(static_cast<std::uint32_t>(i->get()));
    }
    const toml::node& rel = Require(term, "relation", ctx);
    try {
      br.cond.relation = ParseRelation(RequireString(term, "relation", ctx));
    } catch (const std::invalid_argument& e) {
      Fail(rel, ctx + ": " + e.what());
    }
    br.cond.constant = RequireConstant(term, ctx);
    br.then_block = RequireBlockId(term, "then", ctx);
    br.else_block = RequireBlockId(term, "else", ctx);
    return br;
  }
  Fail(term, ctx + ": unknown terminator kind '" + kind + "'");
}

}  // namespace

ProgramModel ParseProgram(std::string_view text) {
  toml::table doc;
  try {
    doc = toml::parse(text);
  } catch (const toml::parse_error& e) {
    throw SyntaxError(std::string(e.description()), e.source().begin.line,
                      e.source().begin.column);
  }

  const std::string entry = RequireString(doc, "entry_function", "program");

  std::vector<FunctionDef> functions;
  const toml::node* fnodes = doc.get("function");
  if (fnodes == nullptr || !fnodes->is_array_of_tables()) {
    throw SyntaxError("program: expected a [[function]] array of tables", 0, 0);
  }
  for (const toml::node& fnode : *fnodes->as_array()) {
    const toml::table& ft = AsTable(fnode, "function");
    FunctionDef fn;
    fn.name = RequireString(ft, "name", "function");
    const std::string ctx = "function '" + fn.name + "'";
    fn.entry_block = RequireBlockId(ft, "entry", ctx);
    const toml::node* bnodes = ft.get("block");
    if (bnodes == nullptr || !bnodes->is_array_of_tables()) {
      Fail(ft, ctx + ": expected a [[function.block]] array");
    }
    for (const toml::node& bnode : *bnodes->as_array()) {
      const toml::table& bt = AsTable(bnode, "block");
      BasicBlock b;
      b.id = RequireBlockId(bt, "id", ctx + " block");
      const std::string bctx = "block " + std::to_string(b.id);
      b.label = RequireString(bt, "label", bctx);
      b.terminator =
          ParseTerminator(AsTable(Require(bt, "term", bctx), bctx + " term"),
                          bctx);
      fn.blocks.push_back(std::move(b));
    }
    functions.push_back(std::move(fn));
  }

  std::vector<TargetPoint> targets;
  if (const toml::node* tnodes = doc.get("target")) {
    if (!tnodes->is_array_of_tables()) {
      Fail(*tnodes, "program: 'target' must be a [[target]] array");
    }
    for (const toml::node& tnode : *tnodes->as_array()) {
      const toml::table& tt = AsTable(tnode, "target");
      targets.push_back(TargetPoint{RequireString(tt, "id", "target"),
                                    RequireString(tt, "location", "target")});
    }
  }

  return ProgramModel(std::move(functions), entry, std::move(targets));
}

ProgramModel LoadProgram(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ProgramError("cannot read program file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ParseProgram(ss.str());
}

}  // namespace hydfuzz
