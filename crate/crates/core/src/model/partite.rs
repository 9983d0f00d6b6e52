use std::collections::HashSet;

use super::Instance;
use crate::error::{Error, Result};

/// Whether every product takes at most one item from each group of
/// `partition`. The partition must cover all items with exactly `L` disjoint
/// groups (groups may be empty).
pub fn is_l_partite(instance: &Instance, partition: &[Vec<String>]) -> Result<bool> {
    if partition.len() != instance.l() {
        return Err(Error::pre(format!(
            "partition has {} groups, expected L = {}",
            partition.len(),
            instance.l()
        )));
    }
    let mut group = vec![usize::MAX; instance.items().len()];
    for (g, ids) in partition.iter().enumerate() {
        for id in ids {
            let i = instance
                .item_by_id(id)
                .ok_or_else(|| Error::pre(format!("partition names unknown item `{id}`")))?;
            if group[i] != usize::MAX {
                return Err(Error::pre(format!("item `{id}` appears in two groups")));
            }
            group[i] = g;
        }
    }
    if let Some(i) = group.iter().position(|&g| g == usize::MAX) {
        return Err(Error::pre(format!(
            "item `{}` is not covered by the partition",
            instance.items()[i].id
        )));
    }
    Ok(instance.products().iter().all(|p| {
        let mut used = HashSet::with_capacity(p.items.len());
        p.items.iter().all(|&i| used.insert(group[i]))
    }))
}
