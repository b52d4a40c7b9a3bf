// Copyright 2026 The specattr Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SPECATTR_PARALLEL_H_
#define SPECATTR_PARALLEL_H_

#include <cstddef>
#include <functional>

namespace specattr {

// threads <= 0 selects std::thread::hardware_concurrency() (at least 1).
int ResolveThreadCount(int requested);

// Calls fn(i) for every i in [0, n) on up to `threads` workers. fn must write
// only to state owned by index i; callers reduce afterwards in index order,
// which keeps results independent of the worker count. If any call throws,
// the exception from the lowest failing index is rethrown.
void ParallelFor(size_t n, int threads, const std::function<void(size_t)>& fn);

}  // namespace specattr

#endif  // SPECATTR_PARALLEL_H_
