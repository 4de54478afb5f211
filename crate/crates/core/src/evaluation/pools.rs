//! Cold-start candidate pools over categories a user never bought from
//! in training.

use std::collections::BTreeSet;

use crate::dataset::Dataset;

fn train_categories(dataset: &Dataset, train_items: &[usize]) -> BTreeSet<usize> {
    train_items
        .iter()
        .map(|&i| dataset.item_category[i])
        .collect()
}

/// Categories of the user's test positives not seen in training.
pub fn unexplored_test_categories(
    dataset: &Dataset,
    train_items: &[usize],
    test_items: &[usize],
) -> BTreeSet<usize> {
    let explored = train_categories(dataset, train_items);
    test_items
        .iter()
        .map(|&i| dataset.item_category[i])
        .filter(|c| !explored.contains(c))
        .collect()
}

/// CIR: every item of the user's unexplored test-positive categories.
/// `None` when the user has no test positive in an unexplored category.
pub fn build_cir_pool(
    dataset: &Dataset,
    train_items: &[usize],
    test_items: &[usize],
) -> Option<Vec<usize>> {
    let cats = unexplored_test_categories(dataset, train_items, test_items);
    if cats.is_empty() {
        return None;
    }
    Some(
        (0..dataset.item_count())
            .filter(|&i| cats.contains(&dataset.item_category[i]))
            .collect(),
    )
}

/// UCIR: every item whose category is outside the user's training
/// categories. `None` under the same condition as CIR or when the pool is
/// empty.
pub fn build_ucir_pool(
    dataset: &Dataset,
    train_items: &[usize],
    test_items: &[usize],
) -> Option<Vec<usize>> {
    if unexplored_test_categories(dataset, train_items, test_items).is_empty() {
        return None;
    }
    let explored = train_categories(dataset, train_items);
    let pool: Vec<usize> = (0..dataset.item_count())
        .filter(|&i| !explored.contains(&dataset.item_category[i]))
        .collect();
    (!pool.is_empty()).then_some(pool)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Seven categories A..G with two items each; item `2c` and `2c+1`
    /// belong to category `c`.
    pub(crate) fn seven_categories(train: Vec<usize>, test: Vec<usize>) -> Dataset {
        let cats = ["A", "B", "C", "D", "E", "F", "G"];
        Dataset {
            user_ids: vec!["u".into()],
            item_ids: (0..14).map(|i| format!("i{i}")).collect(),
            category_ids: cats.iter().map(|c| c.to_string()).collect(),
            price_level_count: 2,
            item_price_level: vec![0; 14],
            item_category: (0..14).map(|i| i / 2).collect(),
            train: train.into_iter().map(|i| (0, i)).collect(),
            validation: vec![],
            test: test.into_iter().map(|i| (0, i)).collect(),
        }
    }

    #[test]
    fn worked_example() {
        // train A, B, C; test E
        let ds = seven_categories(vec![0, 2, 4], vec![8]);
        let train = [0, 2, 4];
        let test = [8];
        assert_eq!(build_cir_pool(&ds, &train, &test).unwrap(), vec![8, 9]);
        assert_eq!(
            build_ucir_pool(&ds, &train, &test).unwrap(),
            (6..14).collect::<Vec<_>>()
        );
    }

    #[test]
    fn explored_test_categories_are_filtered() {
        let ds = seven_categories(vec![0, 2, 4, 10], vec![8, 11]);
        // E unexplored, F explored
        assert_eq!(
            build_cir_pool(&ds, &[0, 2, 4, 10], &[8, 11]).unwrap(),
            vec![8, 9]
        );
    }

    #[test]
    fn skipped_users() {
        let ds = seven_categories(vec![0, 2], vec![1]);
        assert!(build_cir_pool(&ds, &[0, 2], &[1]).is_none());
        assert!(build_ucir_pool(&ds, &[0, 2], &[1]).is_none());

        // training covers every category
        let all: Vec<usize> = (0..14).step_by(2).collect();
        assert!(build_ucir_pool(&ds, &all, &[1]).is_none());
    }

    #[test]
    fn single_category_dataset() {
        let mut ds = seven_categories(vec![0], vec![1]);
        ds.item_category = vec![0; 14];
        assert!(build_ucir_pool(&ds, &[0], &[1]).is_none());
    }

    #[test]
    fn ucir_contains_cir() {
        let ds = seven_categories(vec![0, 6], vec![8, 12, 1]);
        let cir = build_cir_pool(&ds, &[0, 6], &[8, 12, 1]).unwrap();
        let ucir = build_ucir_pool(&ds, &[0, 6], &[8, 12, 1]).unwrap();
        assert!(cir.iter().all(|i| ucir.contains(i)));
    }
}
