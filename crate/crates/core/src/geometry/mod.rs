//! Finite fields, affine planes and the adversarial instances built on them.

mod field;

pub use field::{prime_power, Elem, FiniteField};

use crate::error::{Error, Result};
use crate::model::{Instance, Item, Product};

/// Affine plane of order L over GF(L). Points are indexed `a·L + b` for the
/// point (a, b). Class `m < L` holds the lines `y = m·x + c`, class `L` the
/// vertical lines `x = c`; line `c` of each class is indexed by `c`.
#[derive(Clone, Debug)]
pub struct AffinePlane {
    order: usize,
    classes: Vec<Vec<Vec<usize>>>,
}

impl AffinePlane {
    pub fn new(order: u64) -> Result<Self> {
        if order > 256 {
            return Err(Error::invalid("L", "plane order must be at most 256"));
        }
        let (p, k) = prime_power(order).ok_or(Error::NoPlane(order))?;
        let f = FiniteField::build(p, k)?;
        let l = order as usize;
        let q = order as Elem;
        let mut classes = Vec::with_capacity(l + 1);
        for m in 0..q {
            let lines = (0..q)
                .map(|c| {
                    (0..q)
                        .map(|x| x as usize * l + f.add(f.mul(m, x), c) as usize)
                        .collect()
                })
                .collect();
            classes.push(lines);
        }
        let vertical = (0..l)
            .map(|c| (0..l).map(|y| c * l + y).collect())
            .collect();
        classes.push(vertical);
        let plane = Self { order: l, classes };
        plane.check()?;
        Ok(plane)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn num_points(&self) -> usize {
        self.order * self.order
    }

    /// `1 + L` classes of `L` lines, each line a sorted list of point indices.
    pub fn classes(&self) -> &[Vec<Vec<usize>>] {
        &self.classes
    }

    pub fn point_id(&self, point: usize) -> String {
        format!("pt({},{})", point / self.order, point % self.order)
    }

    pub fn line_id(class: usize, index: usize) -> String {
        format!("ln({class},{index})")
    }

    /// Verifies the plane axioms: sizes, classes partition the points, lines
    /// from different classes meet in exactly one point.
    pub fn check(&self) -> Result<()> {
        let l = self.order;
        let n = l * l;
        let fail = |msg: String| Err(Error::pre(format!("plane of order {l}: {msg}")));
        if self.classes.len() != l + 1 {
            return fail("wrong number of classes".into());
        }
        for (ci, class) in self.classes.iter().enumerate() {
            if class.len() != l {
                return fail(format!("class {ci} has {} lines", class.len()));
            }
            let mut covered = vec![false; n];
            for line in class {
                if line.len() != l || line.windows(2).any(|w| w[0] >= w[1]) {
                    return fail(format!("a line of class {ci} is malformed"));
                }
                for &pt in line {
                    if pt >= n || std::mem::replace(&mut covered[pt], true) {
                        return fail(format!("class {ci} is not a partition"));
                    }
                }
            }
        }
        for (ca, class_a) in self.classes.iter().enumerate() {
            for class_b in &self.classes[ca + 1..] {
                for a in class_a {
                    for b in class_b {
                        let meet = sorted_meet(a, b);
                        if meet != 1 {
                            return fail(format!("two lines meet in {meet} points"));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

fn sorted_meet(a: &[usize], b: &[usize]) -> usize {
    let (mut u, mut v, mut k) = (0, 0, 0);
    while u < a.len() && v < b.len() {
        match a[u].cmp(&b[v]) {
            std::cmp::Ordering::Less => u += 1,
            std::cmp::Ordering::Greater => v += 1,
            std::cmp::Ordering::Equal => {
                k += 1;
                u += 1;
                v += 1;
            }
        }
    }
    k
}

pub fn affine_plane(l: u64) -> Result<AffinePlane> {
    AffinePlane::new(l)
}

/// One unit item per point, one product per line, one batch per class. The
/// first L classes get `x = (1−ε)/L` and reward 1; the last class gets
/// `x = ε` and reward `1/(εL)`. The fluid LP value is `1 + L(1−ε)`.
pub fn tightness_instance(l: u64, eps: f64) -> Result<Instance> {
    let plane = AffinePlane::new(l)?;
    let lf = l as f64;
    if !(eps > 0.0 && eps < 1.0 / lf) {
        return Err(Error::invalid(
            "eps",
            format!("need 0 < eps < 1/L = {}", 1.0 / lf),
        ));
    }
    plane_instance(&plane, |class| {
        if class < plane.order {
            ((1.0 - eps) / lf, 1.0)
        } else {
            (eps, 1.0 / (eps * lf))
        }
    })
}

/// Plane instance with every `x = 1/(1+L)` and reward 1.
pub fn random_order_instance(l: u64) -> Result<Instance> {
    let plane = AffinePlane::new(l)?;
    let x = 1.0 / (1.0 + l as f64);
    plane_instance(&plane, |_| (x, 1.0))
}

/// The hand-labelled order-2 example on items 1..4 with batches
/// {12, 34}, {13, 24}, {14, 23}; the first two batches have `x = (1−ε)/2`,
/// the last `x = ε`. All rewards are 1.
pub fn illustrative_instance(eps: f64) -> Result<Instance> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::invalid("eps", "need 0 < eps < 1/2"));
    }
    let mut b = crate::model::InstanceBuilder::new();
    for i in ["1", "2", "3", "4"] {
        b.item(i, 1);
    }
    let batches = [
        [["1", "2"], ["3", "4"]],
        [["1", "3"], ["2", "4"]],
        [["1", "4"], ["2", "3"]],
    ];
    for (t, pairs) in batches.iter().enumerate() {
        let bt = b.batch();
        let x = if t < 2 { (1.0 - eps) / 2.0 } else { eps };
        for pair in pairs {
            b.product(format!("({},{})", pair[0], pair[1]), pair, 1.0, x, bt);
        }
    }
    b.build(2)
}

/// Plane instance with a caller-chosen `(active_prob, reward)` per class.
pub fn plane_instance(
    plane: &AffinePlane,
    per_class: impl Fn(usize) -> (f64, f64),
) -> Result<Instance> {
    let items = (0..plane.num_points())
        .map(|p| Item {
            id: plane.point_id(p),
            inventory: 1,
        })
        .collect();
    let mut products = Vec::new();
    let mut batches = Vec::new();
    for (ci, class) in plane.classes().iter().enumerate() {
        let (x, r) = per_class(ci);
        let mut batch = Vec::new();
        for (li, line) in class.iter().enumerate() {
            batch.push(products.len());
            products.push(Product {
                id: AffinePlane::line_id(ci, li),
                items: line.clone(),
                reward: r,
                active_prob: x,
                batch: ci,
            });
        }
        batches.push(batch);
    }
    Instance::from_parts(plane.order(), items, products, batches)
}
