#include "pitopt/worker_pool.hpp"

#include <algorithm>

namespace pitopt {

WorkerPool::WorkerPool(int workers) {
  const int count = std::max(1, workers);
  threads_.reserve(static_cast<size_t>(count));
  for (int w = 0; w < count; ++w) {
    threads_.emplace_back([this, w] { worker_loop(w); });
  }
}

WorkerPool::~WorkerPool() {
  {
    std::lock_guard<std::mutex> lock(mutex_);
    shutdown_ = true;
  }
  work_ready_.notify_all();
  for (auto& t : threads_) t.join();
}

void WorkerPool::run(int n_tasks, const std::function<void(int)>& task) {
  if (n_tasks <= 0) return;
  std::unique_lock<std::mutex> lock(mutex_);
  task_ = &task;
  n_tasks_ = n_tasks;
  first_error_ = nullptr;
  workers_running_ = size();
  ++epoch_;
  work_ready_.notify_all();
  batch_done_.wait(lock, [this] { return workers_running_ == 0; });
  task_ = nullptr;
  if (first_error_) std::rethrow_exception(first_error_);
}

void WorkerPool::worker_loop(int worker_index) {
  unsigned long long seen_epoch = 0;
  for (;;) {
    const std::function<void(int)>* task = nullptr;
    int n_tasks = 0;
    {
      std::unique_lock<std::mutex> lock(mutex_);
      work_ready_.wait(lock, [&] { return shutdown_ || epoch_ != seen_epoch; });
      if (shutdown_) return;
      seen_epoch = epoch_;
      task = task_;
      n_tasks = n_tasks_;
    }
    std::exception_ptr error;
    for (int i = worker_index; i < n_tasks; i += size()) {
      try {
        (*task)(i);
      } catch (...) {
        if (!error) error = std::current_exception();
      }
    }
    {
      std::lock_guard<std::mutex> lock(mutex_);
      if (error && !first_error_) first_error_ = error;
      if (--workers_running_ == 0) batch_done_.notify_all();
    }
  }
}

}  // namespace pitopt
