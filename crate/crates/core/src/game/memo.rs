use std::num::NonZeroUsize;
use std::sync::atomic::{AtomicU8, Ordering};

use lru::LruCache;
use parking_lot::Mutex;

use super::{coalition_mask, Coalition, CoalitionGame, PlayerId};

pub const DEFAULT_MEMO_CAPACITY: usize = 1 << 20;

// Games up to this size get a dense lock-free table instead of an LRU.
const DENSE_LIMIT: usize = 20;

const UNKNOWN: u8 = 0;
const LOSING: u8 = 1;
const WINNING: u8 = 2;

enum Store {
    Dense(Vec<AtomicU8>),
    Lru(Mutex<LruCache<Coalition, bool>>),
}

/// Caches a game's valuation by coalition. Small games use a full table;
/// larger ones a bounded LRU.
pub struct Memoized<G> {
    inner: G,
    store: Store,
}

impl<G: CoalitionGame> Memoized<G> {
    pub fn new(inner: G) -> Self {
        Memoized::with_capacity(inner, DEFAULT_MEMO_CAPACITY)
    }

    pub fn with_capacity(inner: G, capacity: usize) -> Self {
        let n = inner.player_count();
        let store = if n <= DENSE_LIMIT {
            Store::Dense((0..1usize << n).map(|_| AtomicU8::new(UNKNOWN)).collect())
        } else {
            let cap = NonZeroUsize::new(capacity.max(1)).unwrap();
            Store::Lru(Mutex::new(LruCache::new(cap)))
        };
        Memoized { inner, store }
    }

    pub fn inner(&self) -> &G {
        &self.inner
    }
}

impl<G: CoalitionGame> CoalitionGame for Memoized<G> {
    fn players(&self) -> &[PlayerId] {
        self.inner.players()
    }

    fn value(&self, coalition: &Coalition) -> bool {
        match &self.store {
            Store::Dense(table) => {
                let slot = &table[coalition_mask(coalition) as usize];
                match slot.load(Ordering::Relaxed) {
                    WINNING => true,
                    LOSING => false,
                    _ => {
                        let v = self.inner.value(coalition);
                        slot.store(if v { WINNING } else { LOSING }, Ordering::Relaxed);
                        v
                    }
                }
            }
            Store::Lru(cache) => {
                if let Some(&v) = cache.lock().get(coalition) {
                    return v;
                }
                let v = self.inner.value(coalition);
                cache.lock().put(coalition.clone(), v);
                v
            }
        }
    }
}
