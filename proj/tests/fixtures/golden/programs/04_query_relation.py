object_set = scene()
chair = list(filter(object_set=object_set, category="chair"))[0]
table_set = filter(object_set=object_set, category="table")
table = list(relate_agent(object_set=table_set, relation="right"))[0]
relation = query_relation(object=chair, reference_object=table)
print(f"The chair is in the direction of {' '.join(relation)} to the table")
relation = query_relation(object=chair, reference_object=table, candidate_relations=["left", "right"])
print(f"The chair is on the {' '.join(relation)} of the table")
