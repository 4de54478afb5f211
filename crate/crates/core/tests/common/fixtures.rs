use pup::dataset::Dataset;

/// Five users over six items in one category. Each user ranks the items
/// in a fixed preference order; see `expected_*` for the hand-derived
/// metric values.
pub fn five_user_fixture() -> (Dataset, Vec<Vec<usize>>) {
    let ds = Dataset {
        user_ids: (0..5).map(|u| format!("u{u}")).collect(),
        item_ids: (0..6).map(|i| format!("i{i}")).collect(),
        category_ids: vec!["c".into()],
        price_level_count: 2,
        item_price_level: vec![0, 1, 0, 1, 0, 1],
        item_category: vec![0; 6],
        train: vec![(0, 0), (1, 1), (2, 2), (3, 3), (4, 4)],
        validation: vec![(4, 5)],
        test: vec![
            (0, 1),
            (0, 2),
            (1, 3),
            (2, 0),
            (3, 4),
            (3, 5),
            (3, 0),
            (4, 5),
            (4, 0),
        ],
    };
    let preference = vec![
        vec![5, 1, 3, 2, 4],
        vec![3, 0, 2, 4, 5],
        vec![1, 0, 3, 4, 5],
        vec![4, 5, 0, 1, 2],
        vec![5, 2, 1, 0, 3],
    ];
    (ds, preference)
}

pub fn preference_score(preference: &[Vec<usize>], user: usize, item: usize) -> f64 {
    preference[user]
        .iter()
        .position(|&i| i == item)
        .map_or(-100.0, |r| -(r as f64))
}

/// Mean Recall@1 and NDCG@1.
///   u0 top [5]: miss. u1 top [3]: hit. u2 top [1]: miss.
///   u3 top [4]: 1 of 3 relevant, ideal DCG@1 = 1. u4 top [2]: miss
///   (item 5 is a validation positive, so only item 0 is relevant).
pub fn expected_at_1() -> (f64, f64) {
    (
        (0.0 + 1.0 + 0.0 + 1.0 / 3.0 + 0.0) / 5.0,
        (0.0 + 1.0 + 0.0 + 1.0 + 0.0) / 5.0,
    )
}

/// Mean Recall@3 and NDCG@3.
///   u0 top [5, 1, 3]: one of {1, 2} at rank 2.
///   u1: hit at rank 1. u2 top [1, 0, 3]: hit at rank 2.
///   u3 top [4, 5, 0]: all three relevant.
///   u4 top [2, 1, 0]: hit at rank 3.
pub fn expected_at_3() -> (f64, f64) {
    let l3 = 1.0 / 3f64.log2();
    let recall = (0.5 + 1.0 + 1.0 + 1.0 + 1.0) / 5.0;
    let ndcg = (l3 / (1.0 + l3) + 1.0 + l3 + 1.0 + 0.5) / 5.0;
    (recall, ndcg)
}

/// Seven categories A..G; items `2c` and `2c + 1` belong to category `c`.
pub fn seven_categories(train: Vec<usize>, test: Vec<usize>) -> Dataset {
    Dataset {
        user_ids: vec!["u".into()],
        item_ids: (0..14).map(|i| format!("i{i}")).collect(),
        category_ids: ["A", "B", "C", "D", "E", "F", "G"]
            .iter()
            .map(|c| c.to_string())
            .collect(),
        price_level_count: 2,
        item_price_level: (0..14).map(|i| i % 2).collect(),
        item_category: (0..14).map(|i| i / 2).collect(),
        train: train.into_iter().map(|i| (0, i)).collect(),
        validation: vec![],
        test: test.into_iter().map(|i| (0, i)).collect(),
    }
}
