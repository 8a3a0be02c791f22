//! Accuracy tables: kernels as rows, m values as
//! columns, one block per (protocol, classifier), printed to 2 decimals.

use mkpls::kernels::KernelSpec;

use crate::config::{Classifier, Protocol};
use crate::experiment::CellLog;

pub fn render_table(
    protocols: &[Protocol],
    classifiers: &[Classifier],
    kernels: &[KernelSpec],
    m_values: &[usize],
    cells: &[CellLog],
) -> String {
    let mut out = String::from("protocol,classifier,kernel");
    for m in m_values {
        out.push_str(&format!(",m={m}"));
    }
    out.push('\n');

    for protocol in protocols {
        for classifier in classifiers {
            for spec in kernels {
                out.push_str(&format!(
                    "{},{},{}",
                    protocol.name(),
                    classifier.name(),
                    spec.kind
                ));
                for &m in m_values {
                    let cell = cells
                        .iter()
                        .find(|c| {
                            c.protocol == protocol.name()
                                && c.classifier == classifier.name()
                                && c.kernel == spec.kind.to_string()
                                && c.m == m
                        })
                        .expect("cell for every grid point");
                    out.push_str(&format!(",{:.2}", cell.mean_accuracy));
                }
                out.push('\n');
            }
        }
    }
    out
}
