#pragma once

#include <vector>

#include "sdt/core.hpp"
#include "sdt/strp.hpp"

namespace sdt::test {

inline MicroOp int_op(std::uint32_t latency = 1) {
  MicroOp op;
  op.op_class = OpClass::IntAlu;
  op.exec_latency = latency;
  op.pc = 0x400000;
  return op;
}

// Dependent chain of n ops, each on the previous one.
inline std::vector<MicroOp> chain(std::size_t n, MicroOp proto) {
  std::vector<MicroOp> ops;
  for (std::size_t i = 0; i < n; ++i) {
    MicroOp op = proto;
    op.pc = 0x400000 + (i % 16) * 4;
    if (i > 0) op.add_dep(i - 1);
    ops.push_back(op);
  }
  return ops;
}

// A core and its memory, with the whole core given to one thread.
struct Bench {
  explicit Bench(const CoreConfig& c = CoreConfig{}, ThreadId owner = ThreadId::Main)
      : config(c), memory(c, 1), core(c, memory) {
    core.set_scheme(single_thread_scheme(c, owner));
  }
  // Steps until `src` has committed everything; returns the cycle count.
  Cycle run(VectorSource& src, Cycle guard = 10'000'000) {
    while (src.committed() < src.size() && core.now() < guard) core.step();
    return core.now();
  }

  CoreConfig config;
  MemorySystem memory;
  Core core;
};

}  // namespace sdt::test
