use std::collections::VecDeque;
use std::sync::{Condvar, Mutex};
use std::time::{Duration, Instant};

const WINDOW: Duration = Duration::from_secs(60);

/// Bounds concurrent calls and calls per rolling minute.
pub struct Throttle {
    max_in_flight: Option<usize>,
    rpm: Option<usize>,
    in_flight: Mutex<usize>,
    freed: Condvar,
    starts: Mutex<VecDeque<Instant>>,
}

pub struct Permit<'a> {
    throttle: &'a Throttle,
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        if self.throttle.max_in_flight.is_some() {
            let mut n = self.throttle.in_flight.lock().unwrap();
            *n -= 1;
            self.throttle.freed.notify_one();
        }
    }
}

impl Throttle {
    pub fn new(max_in_flight: Option<usize>, requests_per_minute: Option<usize>) -> Self {
        Throttle {
            max_in_flight: max_in_flight.map(|n| n.max(1)),
            rpm: requests_per_minute.map(|n| n.max(1)),
            in_flight: Mutex::new(0),
            freed: Condvar::new(),
            starts: Mutex::new(VecDeque::new()),
        }
    }

    pub fn unlimited() -> Self {
        Self::new(None, None)
    }

    pub fn in_flight(&self) -> usize {
        *self.in_flight.lock().unwrap()
    }

    /// Blocks until a slot is free under both limits.
    pub fn acquire(&self) -> Permit<'_> {
        if let Some(max) = self.max_in_flight {
            let mut n = self.in_flight.lock().unwrap();
            while *n >= max {
                n = self.freed.wait(n).unwrap();
            }
            *n += 1;
        }
        if let Some(rpm) = self.rpm {
            loop {
                let wait = {
                    let mut starts = self.starts.lock().unwrap();
                    let now = Instant::now();
                    while starts.front().is_some_and(|t| now.duration_since(*t) >= WINDOW) {
                        starts.pop_front();
                    }
                    if starts.len() < rpm {
                        starts.push_back(now);
                        None
                    } else {
                        Some(WINDOW - now.duration_since(starts[0]))
                    }
                };
                match wait {
                    None => break,
                    Some(d) => std::thread::sleep(d),
                }
            }
        }
        Permit { throttle: self }
    }
}
