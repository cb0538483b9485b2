//! Longest-prefix match over IPv4 CIDR blocks.

use std::collections::HashMap;
use std::net::Ipv4Addr;

use ipnet::Ipv4Net;

/// One hash table per prefix length; lookups probe the populated lengths
/// from longest to shortest.
#[derive(Debug, Clone)]
pub struct PrefixMap<V> {
    by_len: Vec<HashMap<u32, V>>,
    lengths: Vec<u8>,
    len: usize,
}

impl<V> Default for PrefixMap<V> {
    fn default() -> Self {
        PrefixMap {
            by_len: (0..=32).map(|_| HashMap::new()).collect(),
            lengths: Vec::new(),
            len: 0,
        }
    }
}

fn mask(len: u8) -> u32 {
    if len == 0 {
        0
    } else {
        u32::MAX << (32 - len)
    }
}

impl<V> PrefixMap<V> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Inserts `net` (host bits are ignored), returning the value it replaced.
    pub fn insert(&mut self, net: Ipv4Net, value: V) -> Option<V> {
        let len = net.prefix_len();
        let key = u32::from(net.network()) & mask(len);
        let old = self.by_len[len as usize].insert(key, value);
        if old.is_none() {
            self.len += 1;
            if let Err(pos) = self.lengths.binary_search_by(|l| len.cmp(l)) {
                self.lengths.insert(pos, len);
            }
        }
        old
    }

    pub fn get_exact(&self, net: Ipv4Net) -> Option<&V> {
        let len = net.prefix_len();
        self.by_len[len as usize].get(&(u32::from(net.network()) & mask(len)))
    }

    /// Value and prefix of the most specific entry covering `ip`.
    pub fn lookup_prefix(&self, ip: Ipv4Addr) -> Option<(Ipv4Net, &V)> {
        let addr = u32::from(ip);
        self.lengths.iter().find_map(|&len| {
            let key = addr & mask(len);
            self.by_len[len as usize].get(&key).map(|v| {
                (
                    Ipv4Net::new(Ipv4Addr::from(key), len).expect("len <= 32"),
                    v,
                )
            })
        })
    }

    pub fn lookup(&self, ip: Ipv4Addr) -> Option<&V> {
        self.lookup_prefix(ip).map(|(_, v)| v)
    }

    pub fn iter(&self) -> impl Iterator<Item = (Ipv4Net, &V)> + '_ {
        self.lengths.iter().flat_map(move |&len| {
            self.by_len[len as usize]
                .iter()
                .map(move |(&k, v)| (Ipv4Net::new(Ipv4Addr::from(k), len).expect("len <= 32"), v))
        })
    }
}

impl<V> FromIterator<(Ipv4Net, V)> for PrefixMap<V> {
    fn from_iter<I: IntoIterator<Item = (Ipv4Net, V)>>(iter: I) -> Self {
        let mut m = PrefixMap::new();
        for (net, v) in iter {
            m.insert(net, v);
        }
        m
    }
}
