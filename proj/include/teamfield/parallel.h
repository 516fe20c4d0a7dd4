// Copyright 2026 The Teamfield Authors
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

#ifndef TEAMFIELD_PARALLEL_H_
#define TEAMFIELD_PARALLEL_H_

#include <cstdint>
#include <functional>

namespace teamfield {

// Worker count: SetWorkerCount override if positive, else TEAMFIELD_THREADS
// if set and positive, else hardware concurrency.
int WorkerCount();

// Overrides the worker count for the process; 0 restores the default lookup.
void SetWorkerCount(int workers);

// Runs body(i) for i in [0, n) over WorkerCount() threads using contiguous
// static chunks. Bodies must only write to per-index storage; callers reduce
// the results afterwards in index order, which keeps every reduction
// independent of the worker count.
void ParallelFor(std::int64_t n, const std::function<void(std::int64_t)>& body);

}  // namespace teamfield

#endif  // TEAMFIELD_PARALLEL_H_
